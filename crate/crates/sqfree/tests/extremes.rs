use proptest::prelude::*;

use sqfree::extremes::{
    arcsine_compare, arcsine_moment, mori_f, mori_mass, sieved_extremes, stored_extremes, summarize, tau_compare,
    tau_moment_table, walk_extremes, write_extremes_csv, write_tau_moments_csv, SegmentExtremes, MIN_SAMPLES,
};
use sqfree::rng::{fair_bits, substream};
use sqfree::seqgen::restricted_sequence;
use sqfree::Error;

fn fair_segments(seed: u64, n: usize, t: usize) -> Vec<SegmentExtremes> {
    let mut rng = substream(seed, 0);
    (0..n)
        .map(|i| {
            let bits = fair_bits(&mut rng, t);
            let (t_min, t_max) = walk_extremes(&bits);
            SegmentExtremes {
                segment_start: 1 + (i * t) as u64,
                t: t as u64,
                t_min,
                t_max,
                tau: t_max as i64 - t_min as i64,
            }
        })
        .collect()
}

#[test]
fn fair_walk_moments_follow_arcsine() {
    let segs = fair_segments(8, 20_000, 2_000);
    // first attainment biases x_min early and x_max likewise; 1 - x_max mirrors it
    let xs: Vec<f64> = segs.iter().map(SegmentExtremes::x_min).chain(segs.iter().map(|e| 1.0 - e.x_max())).collect();
    let fit = arcsine_compare(&xs).unwrap();
    for m in &fit.moments {
        assert!((m.sample / arcsine_moment(m.order) - 1.0).abs() < 0.03, "order {}: {}", m.order, m.sample);
    }
    let taus: Vec<f64> = segs.iter().map(SegmentExtremes::tau_scaled).collect();
    let tf = tau_compare(&taus).unwrap();
    assert!((tf.moments[0].sample / 0.590_863 - 1.0).abs() < 0.03);
}

#[test]
fn sieved_and_stored_agree() {
    let (start, t, n) = (1_000_000u64, 500u64, 3_100u64);
    let seq = restricted_sequence(start, t * n).unwrap();
    let a = sieved_extremes(start, t, n).unwrap();
    assert_eq!(a, stored_extremes(&seq, start, t, n).unwrap());
    assert_eq!(a.len(), n as usize);
    assert!(a.iter().all(|e| e.t_min <= t && e.t_max <= t && e.t_min != e.t_max || e.t_min == 0 && e.t_max == 0));
    assert!(matches!(stored_extremes(&seq, start, t, n + 1), Err(Error::Coverage(_))));
    let s = summarize(&a).unwrap();
    assert_eq!(s.segments, n as usize);
    assert_eq!(s.t, t);
}

#[test]
fn too_few_samples() {
    let segs = fair_segments(1, MIN_SAMPLES - 1, 100);
    assert!(summarize(&segs).is_err());
    let xs = vec![0.5; MIN_SAMPLES];
    assert!(arcsine_compare(&xs).is_ok());
    assert!(arcsine_compare(&[1.5; MIN_SAMPLES]).is_err());
}

#[test]
fn tau_density_has_unit_mass() {
    let total = mori_mass(-1.0, 1.0).unwrap();
    assert!((total - 1.0).abs() < 1e-9, "{total}");
    assert!((mori_mass(-0.3, 0.0).unwrap() - mori_mass(0.0, 0.3).unwrap()).abs() < 1e-12);
    assert!(mori_f(0.0).is_err() && mori_f(1.0).is_err());
}

#[test]
fn csv_writers() {
    let segs = fair_segments(2, 3, 50);
    let mut out = Vec::new();
    write_extremes_csv(&segs, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "segment_start,t,t_min,t_max,tau");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[1], format!("1,50,{},{},{}", segs[0].t_min, segs[0].t_max, segs[0].tau));
    let mut out = Vec::new();
    write_tau_moments_csv(&tau_moment_table(4).unwrap(), &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap().lines().count(), 5);
}

proptest! {
    #[test]
    fn mori_f_even_and_positive(x in 0.001f64..0.999) {
        let a = mori_f(x).unwrap();
        prop_assert!(a > 0.0);
        prop_assert_eq!(a, mori_f(-x).unwrap());
    }

    #[test]
    fn walk_extremes_are_attained(seed in any::<u64>(), t in 1usize..3000) {
        let bits = fair_bits(&mut substream(seed, 0), t);
        let (t_min, t_max) = walk_extremes(&bits);
        let mut w = vec![0i64];
        for &b in &bits {
            w.push(w.last().unwrap() + if b != 0 { 1 } else { -1 });
        }
        let lo = *w.iter().min().unwrap();
        let hi = *w.iter().max().unwrap();
        prop_assert_eq!(t_min as usize, w.iter().position(|&v| v == lo).unwrap());
        prop_assert_eq!(t_max as usize, w.iter().position(|&v| v == hi).unwrap());
    }
}
