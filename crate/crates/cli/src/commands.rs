use std::fs;
use std::io::{self, BufWriter, Write};
use std::time::Instant;

use suppdec::bounds::{self, BoundOptions, BoundReport, UnionForm};
use suppdec::decoders::{decode as run_decoder, DecodeOptions, DecoderKind, ExhaustiveOptions};
use suppdec::ensemble::{observe, sample_design, sample_signal};
use suppdec::harness::{self, ExperimentConfig, SweepOptions, PRESET_NAMES};
use suppdec::tails::{verify_binomial_sandwich, verify_tail_grid};
use suppdec::{Error, GramCache, SignMode};

use crate::instance::InstanceFile;
use crate::{BoundsArgs, DecodeArgs, SweepArgs, VerifyTailsArgs};

/// Why a command failed; selects the exit code.
pub enum Failure {
    /// Bad flags or config (exit 2).
    Invalid(String),
    /// Runtime failure such as I/O or a refused enumeration (exit 1).
    Runtime(String),
    /// A verification check failed (exit 3); details are already printed.
    Check,
    /// stdout was closed by the reader; not an error.
    BrokenPipe,
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Self::BrokenPipe => 0,
            Self::Runtime(_) => 1,
            Self::Invalid(_) => 2,
            Self::Check => 3,
        }
    }

    pub fn message(&self) -> Option<&str> {
        match self {
            Self::Invalid(m) | Self::Runtime(m) => Some(m),
            Self::Check | Self::BrokenPipe => None,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::DimensionMismatch { .. } | Error::Config { .. } => Self::Invalid(e.to_string()),
            Error::Io(e) => e.into(),
            Error::Budget { .. } => Self::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return Self::BrokenPipe;
        }
        Self::Runtime(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn invalid<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Invalid(msg.into()))
}

fn parse_flag<T: std::str::FromStr>(flag: &str, v: &str) -> Result<T, Failure>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| Failure::Invalid(format!("--{flag}: {e}")))
}

pub fn decode(a: DecodeArgs) -> CmdResult {
    let kind: DecoderKind = parse_flag("decoder", &a.decoder)?;
    let inst = match &a.instance {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            InstanceFile::parse(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?
        }
        None => {
            let (p, s, n) = (a.p.unwrap(), a.s.unwrap(), a.n.unwrap());
            let sign_mode: SignMode = parse_flag("sign-mode", &a.sign_mode)?;
            if !(a.m2 > 0.0) {
                return invalid("--m2 must be > 0");
            }
            let design = sample_design(n, p, a.seed)?;
            let signal = sample_signal(p, s, a.m2.sqrt(), sign_mode, a.seed)?;
            let obs = observe(&design, &signal, a.sigma, a.seed)?;
            InstanceFile {
                design,
                signal,
                obs,
                seed: a.seed,
            }
        }
    };
    if let Some(path) = &a.emit_instance {
        fs::write(path, inst.render())?;
    }
    let cache = GramCache::new(&inst.design, &inst.obs)?;
    let opts = DecodeOptions {
        exhaustive: ExhaustiveOptions {
            budget: a.budget,
            ..ExhaustiveOptions::default()
        },
        ..DecodeOptions::default()
    };
    let truth = inst.signal.support();
    let start = Instant::now();
    let r = run_decoder(kind, &cache, truth.len(), &opts)?;
    let elapsed = start.elapsed();
    let f_truth = cache.residual(truth.indices())?;
    let f_est = cache.residual(r.estimate.indices())?;

    let mut out = io::stdout().lock();
    writeln!(out, "decoder            {kind}")?;
    writeln!(out, "n p s              {} {} {}", inst.design.n(), inst.design.p(), truth.len())?;
    writeln!(out, "true support       {truth}")?;
    writeln!(out, "estimate           {}", r.estimate)?;
    writeln!(out, "exact recovery     {}", r.estimate == *truth)?;
    writeln!(out, "f(estimate)        {f_est:.12e}")?;
    writeln!(out, "f(true support)    {f_truth:.12e}")?;
    writeln!(out, "delta              {:.12e}", f_est - f_truth)?;
    writeln!(out, "ties               {}", r.tie_count)?;
    writeln!(out, "subsets evaluated  {}", r.subsets_evaluated)?;
    writeln!(out, "converged          {}", r.converged)?;
    eprintln!("decode time: {:.3} ms", elapsed.as_secs_f64() * 1e3);
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6}"))
}

pub fn bounds(a: BoundsArgs) -> CmdResult {
    if a.s == 0 || a.s >= a.p {
        return invalid(format!("need 1 <= s < p, got p={}, s={}", a.p, a.s));
    }
    if !(a.m2 > 0.0 && a.m2.is_finite()) {
        return invalid("--m2 must be finite and > 0");
    }
    if !(a.c > 0.0) || !(a.c_prime > 0.0) {
        return invalid("--C and --Cprime must be > 0");
    }
    let opts = BoundOptions {
        c: a.c,
        c_prime: a.c_prime,
        union_form: parse_flag::<UnionForm>("union-form", &a.union_form)?,
    };
    let sufficient = bounds::sufficient_n(a.p, a.s, a.m2, a.c)?;
    let necessary = bounds::necessary_n(a.p, a.s, a.m2, a.c_prime)?;
    let report = match a.n {
        Some(0) => return invalid("--n must be >= 1"),
        Some(n) => Some(BoundReport::compute(n, a.p, a.s, a.m2, &opts, None)?),
        None => None,
    };
    let mut out = io::stdout().lock();
    if a.json {
        let value = match &report {
            Some(r) => serde_json::to_value(r),
            None => serde_json::to_value(serde_json::json!({
                "p": a.p,
                "s": a.s,
                "m2": a.m2,
                "sufficient_n": sufficient,
                "necessary_n": necessary,
            })),
        }
        .expect("report serialises");
        writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json"))?;
        return Ok(());
    }
    writeln!(out, "p                  {}", a.p)?;
    writeln!(out, "s                  {}", a.s)?;
    writeln!(out, "m2                 {}", a.m2)?;
    writeln!(out, "sufficient_n       {sufficient:.6}  (C = {})", a.c)?;
    writeln!(out, "necessary_n        {necessary:.6}  (C' = {})", a.c_prime)?;
    let Some(r) = report else {
        return Ok(());
    };
    writeln!(out, "n                  {}", r.n)?;
    writeln!(out, "fano_ensemble      {}", opt(r.fano_ensemble))?;
    writeln!(out, "regime_valid       {}", r.regime_valid)?;
    match &r.union {
        Some(u) => {
            writeln!(out, "union_form         {}", u.form)?;
            writeln!(out, "union_bound        {:.6}", u.clipped)?;
            writeln!(out, "union_log_raw      {:.6}", u.log_total)?;
            writeln!(out, "{:>4} {:>24} {:>14} {:>14}", "k", "N(k)", "log bound(k)", "log term")?;
            for t in &u.terms {
                writeln!(out, "{:>4} {:>24} {:>14.6} {:>14.6}", t.k, t.count, t.log_pairwise, t.log_term)?;
            }
        }
        None => writeln!(out, "union_bound        n/a (needs s < n)")?,
    }
    Ok(())
}

pub fn sweep(a: SweepArgs) -> CmdResult {
    let mut cfg = if let Some(path) = &a.config {
        let text = fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
        ExperimentConfig::parse(&text)?
    } else if let Some(name) = &a.preset {
        harness::preset(name)?
    } else {
        ExperimentConfig::default()
    };
    let overrides = [
        ("p", &a.p),
        ("s", &a.s),
        ("n_grid", &a.n_grid),
        ("sigma", &a.sigma),
        ("m2", &a.m2),
        ("sign_mode", &a.sign_mode),
        ("decoder", &a.decoder),
        ("ensemble", &a.ensemble),
        ("trials", &a.trials),
        ("base_seed", &a.seed),
        ("bound_C", &a.c),
        ("bound_Cprime", &a.c_prime),
        ("union_form", &a.union_form),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if let Some(out) = &a.out {
        cfg.out = Some(out.clone());
    }
    cfg.validate()?;

    let opts = SweepOptions { record_timing: a.timing };
    let mut progress = |line: &str| eprintln!("{line}");
    eprintln!("experiment {} ({} trials per point)", cfg.experiment_id(), cfg.trials);
    let summary = match &cfg.out {
        Some(path) => harness::sweep_to_path(&cfg, path, &opts, &mut progress)?,
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            let s = harness::sweep(&cfg, Some(&mut w), &opts, &mut progress)?;
            w.flush()?;
            s
        }
    };
    if let Some(path) = &a.summary {
        fs::write(path, summary.to_json() + "\n")?;
    }
    Ok(())
}

pub fn verify_tails(a: VerifyTailsArgs) -> CmdResult {
    if a.samples == 0 {
        return invalid("--samples must be >= 1");
    }
    let cells = verify_tail_grid(a.samples, a.seed, a.selftest_break)?;
    let mut out = io::stdout().lock();
    let mut failed = 0;
    for c in &cells {
        failed += usize::from(!c.pass);
        writeln!(
            out,
            "{} {:<17} d={:<3} nu={:<3} x={:<4} threshold={:<10.4} bound={:.4e} empirical={:.4e} stderr={:.2e}{}",
            if c.pass { "PASS" } else { "FAIL" },
            c.kind.to_string(),
            c.d,
            c.nu,
            c.x,
            c.threshold,
            c.bound,
            c.empirical,
            c.stderr,
            if c.wide_ci { " WIDE-CI" } else { "" }
        )?;
    }
    let sandwich = verify_binomial_sandwich(40);
    failed += sandwich.len();
    if sandwich.is_empty() {
        writeln!(out, "PASS binomial sandwich for all 1 <= k <= m <= 40")?;
    } else {
        writeln!(out, "FAIL binomial sandwich at {sandwich:?}")?;
    }
    writeln!(out, "{} checks, {failed} failed", cells.len() + 1)?;
    if failed > 0 {
        return Err(Failure::Check);
    }
    Ok(())
}

pub fn presets() -> CmdResult {
    let mut out = io::stdout().lock();
    for name in PRESET_NAMES {
        let cfg = harness::preset(name)?;
        writeln!(out, "{}", cfg.to_config_text())?;
    }
    Ok(())
}
