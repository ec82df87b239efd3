use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use sqfree::battery::{run_battery_at, TestSpec};
use sqfree::dirichlet::{progression_table, write_progression_csv};
use sqfree::extremes::{
    sieved_extremes, stored_extremes, summarize, tau_moment_table, write_extremes_csv, write_fit_csv,
    write_tau_moments_csv, DistributionFit,
};
use sqfree::mertens::{build_ensemble, BlockSource, FairCoin, GapPolicy, Sieved};
use sqfree::numth::{divisor_table, omega_table, pi_table, write_table_csv};
use sqfree::rng::{fair_bits, substream};
use sqfree::seqgen::{read_sequence, restricted_sequence, write_sequence, BitSequence};
use sqfree::{Error, Result};

use crate::{BatteryArgs, Cli, Command, ExtremesArgs, GenArgs, SourceArgs, Table, TablesArgs};

pub fn run(cli: Cli) -> Result<ExitCode> {
    sqfree::par::set_threads(cli.threads)?;
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Battery(a) => battery(a),
        Command::Tables(a) => tables(a),
        Command::Extremes(a) => extremes(a),
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}

/// Prefixes I/O errors with the path involved.
fn at_path(p: &Path) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Io(io) => Error::Io(io::Error::new(io.kind(), format!("{}: {io}", p.display()))),
        other => other,
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| at_path(p)(e.into()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        usage(format!("--alpha must lie in (0, 1), got {alpha}"))
    }
}

fn gen(a: GenArgs) -> Result<ExitCode> {
    if a.start == 0 || a.count == 0 {
        return usage("--start and --count must be >= 1");
    }
    let seq = restricted_sequence(a.start, a.count)?;
    write_sequence(&seq, &a.out).map_err(at_path(&a.out))?;
    println!(
        "wrote ordinals [{}, {}) to {}: {} bits, density of ones {:.6}",
        seq.start_ordinal(),
        seq.end_ordinal(),
        a.out.display(),
        seq.len(),
        seq.count_ones() as f64 / seq.len() as f64
    );
    Ok(ExitCode::SUCCESS)
}

enum Source {
    Stored(BitSequence),
    Sieved,
    Fair(u64),
}

fn source(s: &SourceArgs, seed: Option<u64>) -> Result<Source> {
    if let Some(p) = &s.input {
        Ok(Source::Stored(read_sequence(p).map_err(at_path(p))?))
    } else if s.sieve {
        Ok(Source::Sieved)
    } else {
        match seed {
            Some(seed) => Ok(Source::Fair(seed)),
            None => usage("--fair-coin needs --seed"),
        }
    }
}

fn battery(a: BatteryArgs) -> Result<ExitCode> {
    check_alpha(a.alpha)?;
    let selection = TestSpec::parse_list(&a.tests)?;
    if selection.contains(&TestSpec::CrossCorrelationRandom) && a.seed.is_none() {
        return usage("cross_correlation_random draws a reference sequence and needs --seed");
    }
    let src = source(&a.source, a.seed)?;
    let (lo, hi) = match &src {
        Source::Stored(seq) => (seq.start_ordinal(), seq.end_ordinal()),
        _ => (1, u64::MAX / 2),
    };
    let start = a.start.unwrap_or(lo);
    let end = a.end.unwrap_or(hi);
    let gaps = match a.mean_gap {
        Some(mean) => GapPolicy::Random { mean },
        None => GapPolicy::Fixed(a.gap),
    };
    if matches!(src, Source::Stored(_)) && (start < lo || end > hi) {
        return Err(Error::Coverage(format!(
            "ensemble bounds [{start}, {end}) exceed the file's ordinals [{lo}, {hi})"
        )));
    }
    let ens = build_ensemble(start, end, a.blocks as usize, a.block_len, gaps, a.seed)?;
    let bits: &dyn BlockSource = match &src {
        Source::Stored(seq) => seq,
        Source::Sieved => &Sieved,
        Source::Fair(seed) => &FairCoin { seed: *seed },
    };
    let seed = a.seed.unwrap_or(0);
    let report = run_battery_at(&ens, bits, &selection, seed, a.alpha)?;
    report.write_jsonl(output(a.out.as_deref())?)?;

    let mut err = io::stderr().lock();
    for (key, p) in &report.proportions {
        let u = report.uniformity.get(key);
        let ok = p.inside && u.is_none_or(|u| u.uniform);
        writeln!(
            err,
            "{:<4} {key}: {}/{} passed, interval [{:.5}, {:.5}]{}",
            if ok { "ok" } else { "FAIL" },
            p.passed,
            p.n,
            p.interval.lo,
            p.interval.hi,
            u.map_or(String::new(), |u| format!(", P-bar {:.4}", u.p_bar)),
        )?;
    }
    if !report.skipped.is_empty() {
        writeln!(err, "{} test runs skipped (see skip lines in the report)", report.skipped.len())?;
    }
    Ok(if report.all_pass() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn tables(a: TablesArgs) -> Result<ExitCode> {
    let out = output(a.out.as_deref())?;
    let ns = a.n.map(|c| c.0);
    match a.which {
        Table::Pi => write_table_csv(&pi_table(&ns.unwrap_or(vec![1_000_000]))?, out)?,
        Table::Omega => write_table_csv(&omega_table(&ns.unwrap_or(vec![10_000_000]))?, out)?,
        Table::Divisor => {
            let n = match ns.as_deref() {
                None => 10_000_000,
                Some([n]) => *n,
                Some(_) => return usage("the divisor table takes a single --n"),
            };
            write_table_csv(&divisor_table(&a.primes.0, n)?, out)?
        }
        Table::Residue => write_progression_csv(&progression_table(a.q, a.x)?, out)?,
        Table::Tau => {
            if a.orders == 0 {
                return usage("--orders must be >= 1");
            }
            write_tau_moments_csv(&tau_moment_table(a.orders)?, out)?
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn fit_line(name: &str, f: &DistributionFit) -> String {
    format!("{name}: chi2 = {:.3}, dof = {}, P = {:.4}", f.chi2, f.dof, f.p_value.value)
}

fn extremes(a: ExtremesArgs) -> Result<ExitCode> {
    check_alpha(a.alpha)?;
    if a.t == 0 || a.segments == 0 {
        return usage("--segments and --T must be >= 1");
    }
    let src = source(&a.source, a.seed)?;
    let ext = match &src {
        Source::Stored(seq) => stored_extremes(seq, a.start.unwrap_or(seq.start_ordinal()), a.t, a.segments)?,
        Source::Sieved => sieved_extremes(a.start.unwrap_or(1), a.t, a.segments)?,
        Source::Fair(seed) => {
            let n = a.segments.checked_mul(a.t).filter(|&n| n <= 1 << 31);
            let Some(n) = n else { return usage("synthetic walk longer than 2^31 steps") };
            let seq = BitSequence::from_bits(1, &fair_bits(&mut substream(*seed, 0), n as usize));
            stored_extremes(&seq, 1, a.t, a.segments)?
        }
    };
    if let Some(p) = &a.out {
        write_extremes_csv(&ext, output(Some(p))?)?;
    }
    let s = summarize(&ext)?;
    if let Some(dir) = &a.fits {
        fs::create_dir_all(dir)?;
        write_fit_csv(&s.arcsine_min, output(Some(&dir.join("arcsine_min.csv")))?)?;
        write_fit_csv(&s.arcsine_max, output(Some(&dir.join("arcsine_max.csv")))?)?;
        write_fit_csv(&s.tau, output(Some(&dir.join("tau.csv")))?)?;
    }
    println!("{} segments of T = {} from ordinal {}", s.segments, s.t, ext[0].segment_start);
    println!("{}", fit_line("arcsine (time of minimum)", &s.arcsine_min));
    println!("{}", fit_line("arcsine (time of maximum)", &s.arcsine_max));
    println!("{}", fit_line("max/min separation tau/T", &s.tau));
    for m in &s.tau.moments {
        println!("  <|tau/T|^{}> sample {:.5} exact {:.5}", m.order, m.sample, m.exact);
    }
    let pass = [&s.arcsine_min, &s.arcsine_max, &s.tau].iter().all(|f| f.p_value.value >= a.alpha);
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
