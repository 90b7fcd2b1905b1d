use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::batch::{run_batch, TrialBatchResult};
use super::config::ExperimentConfig;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "experiment_id,p,s,n,sigma,m2,decoder,ensemble,trials,errors,aborted,perr_hat,ci_lo,ci_hi,union_bound,union_regime_valid,fano_exact,fano_ensemble,sufficient_n,necessary_n,base_seed,mean_decode_ms";

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Write `mean_decode_ms` into the CSV. Off by default because wall time
    /// would make reruns differ.
    pub record_timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseRow {
    pub n: usize,
    pub perr_hat: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub union_bound: Option<f64>,
    /// Exact Fano bound when available, otherwise the ensemble form.
    pub fano: Option<f64>,
}

/// Empirical error against `n` for one decoder; `n` strictly increases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCurve {
    pub decoder: String,
    pub rows: Vec<PhaseRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub preset: Option<String>,
    pub version: &'static str,
    pub experiment_id: String,
    pub batches: Vec<TrialBatchResult>,
    pub curves: Vec<PhaseCurve>,
}

impl SweepSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serialises")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// One CSV data row.
pub(crate) fn csv_row(r: &TrialBatchResult, timing: bool) -> String {
    let b = r.bounds.as_ref();
    let union = b.and_then(|b| b.union.as_ref());
    [
        r.experiment_id.clone(),
        r.p.to_string(),
        r.s.to_string(),
        r.n.to_string(),
        r.sigma.to_string(),
        r.m2.to_string(),
        r.decoder.clone(),
        r.ensemble.clone(),
        r.trials.to_string(),
        r.errors.to_string(),
        r.aborted.to_string(),
        opt(r.perr_hat),
        opt(r.ci_lo),
        opt(r.ci_hi),
        opt(union.map(|u| u.clipped)),
        b.map_or_else(String::new, |b| b.regime_valid.to_string()),
        opt(b.and_then(|b| b.fano_exact)),
        opt(b.and_then(|b| b.fano_ensemble)),
        opt(b.and_then(|b| b.sufficient_n)),
        opt(b.and_then(|b| b.necessary_n)),
        r.base_seed.to_string(),
        if timing { format!("{:.6}", r.mean_decode_ms) } else { String::new() },
    ]
    .join(",")
}

fn curves(cfg: &ExperimentConfig, batches: &[TrialBatchResult]) -> Vec<PhaseCurve> {
    cfg.decoders
        .iter()
        .map(|d| {
            let name = d.to_string();
            let rows = batches
                .iter()
                .filter(|b| b.decoder == name)
                .map(|b| {
                    let bounds = b.bounds.as_ref();
                    PhaseRow {
                        n: b.n,
                        perr_hat: b.perr_hat,
                        ci_lo: b.ci_lo,
                        ci_hi: b.ci_hi,
                        union_bound: bounds.and_then(|x| x.union.as_ref()).map(|u| u.clipped),
                        fano: bounds.and_then(|x| x.fano_exact.or(x.fano_ensemble)),
                    }
                })
                .collect();
            PhaseCurve { decoder: name, rows }
        })
        .collect()
}

fn write_trailer(sink: &mut dyn Write, err: &Error) {
    // best effort: the sink may be the thing that failed
    let _ = writeln!(sink, "# incomplete: {err}");
    let _ = sink.flush();
}

/// Runs one batch per grid point. CSV rows go to `sink` as each grid point
/// finishes; on failure a `# incomplete: …` trailer is appended.
pub fn sweep(
    cfg: &ExperimentConfig,
    mut sink: Option<&mut dyn Write>,
    opts: &SweepOptions,
    progress: &mut dyn FnMut(&str),
) -> Result<SweepSummary> {
    cfg.validate()?;
    let mut batches = Vec::new();
    if let Some(w) = sink.as_deref_mut() {
        if let Err(e) = writeln!(w, "{CSV_HEADER}").and_then(|_| w.flush()) {
            let e = Error::Io(e);
            write_trailer(w, &e);
            return Err(e);
        }
    }
    for &n in &cfg.n_grid {
        let results = match run_batch(cfg, n) {
            Ok(r) => r,
            Err(e) => {
                if let Some(w) = sink.as_deref_mut() {
                    write_trailer(w, &e);
                }
                return Err(e);
            }
        };
        for r in &results {
            progress(&format!(
                "n={n} decoder={} errors={}/{} aborted={}",
                r.decoder,
                r.errors,
                r.trials - r.aborted,
                r.aborted
            ));
        }
        if let Some(w) = sink.as_deref_mut() {
            let written = results
                .iter()
                .try_for_each(|r| writeln!(w, "{}", csv_row(r, opts.record_timing)))
                .and_then(|_| w.flush());
            if let Err(e) = written {
                let e = Error::Io(e);
                write_trailer(w, &e);
                return Err(e);
            }
        }
        batches.extend(results);
    }
    Ok(SweepSummary {
        preset: cfg.preset.clone(),
        version: crate::VERSION,
        experiment_id: cfg.experiment_id(),
        curves: curves(cfg, &batches),
        batches,
    })
}

/// [`sweep`] into a freshly created CSV file.
pub fn sweep_to_path(
    cfg: &ExperimentConfig,
    path: &Path,
    opts: &SweepOptions,
    progress: &mut dyn FnMut(&str),
) -> Result<SweepSummary> {
    let mut w = BufWriter::new(File::create(path)?);
    let summary = sweep(cfg, Some(&mut w), opts, progress)?;
    w.flush()?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoders::DecoderKind;

    struct FailAfter {
        buf: Vec<u8>,
        lines_left: usize,
    }

    impl Write for FailAfter {
        fn write(&mut self, data: &[u8]) -> std::io::Result<usize> {
            if data.starts_with(b"# incomplete") {
                self.buf.extend_from_slice(data);
                return Ok(data.len());
            }
            if self.lines_left == 0 {
                return Err(std::io::Error::other("disk full"));
            }
            self.lines_left -= data.iter().filter(|&&b| b == b'\n').count();
            self.buf.extend_from_slice(data);
            Ok(data.len())
        }

        fn flush(&mut self) -> std::io::Result<()> {
            Ok(())
        }
    }

    fn cfg() -> ExperimentConfig {
        ExperimentConfig {
            p: 8,
            s: 2,
            n_grid: vec![4, 8, 16],
            m2: 1.0,
            trials: 20,
            decoders: vec![DecoderKind::Exhaustive],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn csv_shape_and_curve() {
        let mut buf = Vec::new();
        let summary = sweep(&cfg(), Some(&mut buf), &SweepOptions::default(), &mut |_| {}).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], CSV_HEADER);
        for l in &lines[1..] {
            assert_eq!(l.split(',').count(), 22);
            assert!(l.ends_with(','), "timing column should be empty: {l}");
        }
        let curve = &summary.curves[0];
        assert!(curve.rows.windows(2).all(|w| w[0].n < w[1].n));
        // n = 4 has s < n so the union bound exists; the JSON parses back
        let json: serde_json::Value = serde_json::from_str(&summary.to_json()).unwrap();
        assert_eq!(json["batches"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn write_failure_leaves_trailer() {
        let mut sink = FailAfter {
            buf: Vec::new(),
            lines_left: 2,
        };
        let err = sweep(&cfg(), Some(&mut sink), &SweepOptions::default(), &mut |_| {}).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
        let text = String::from_utf8(sink.buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().last().unwrap().starts_with("# incomplete"));
    }

    #[test]
    fn empty_grid_rejected() {
        let c = ExperimentConfig { n_grid: vec![], ..cfg() };
        assert!(sweep(&c, None, &SweepOptions::default(), &mut |_| {}).is_err());
    }
}
