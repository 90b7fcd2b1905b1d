use super::config::{Ensemble, ExperimentConfig};
use crate::decoders::DecoderKind;
use crate::ensemble::SignMode;
use crate::error::{domain, Result};

pub const PRESET_NAMES: [&str; 3] = ["sublinear-regime", "linear-regime", "lasso-gap"];

/// Desk-scale configurations for the two sparsity regimes and the
/// Lasso-versus-optimal comparison.
///
/// * `sublinear-regime`: `p = 256`, `s = ⌈√p⌉ = 16`, `M² = 1/s`. `C(256, 16)`
///   is far past any enumeration budget, so the decoder is OMP.
/// * `linear-regime`: `p = 64`, `s = p/8 = 8`, `M² = 4·log(s)/s`, decoded by
///   OMP and the Lasso on paired instances.
/// * `lasso-gap`: the linear-regime ratios at `p = 32`, `s = 4`, so that the
///   exhaustive decoder fits the budget; exhaustive and Lasso see the same
///   instances.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base = ExperimentConfig {
        preset: Some(name.to_string()),
        sigma: 1.0,
        sign_mode: SignMode::RandomSign,
        ensemble: Ensemble::Generic,
        trials: 200,
        base_seed: 1,
        ..ExperimentConfig::default()
    };
    let linear_m2 = |s: usize| 4.0 * (s as f64).ln() / s as f64;
    let cfg = match name {
        "sublinear-regime" => {
            let p = 256usize;
            let s = (p as f64).sqrt().ceil() as usize;
            ExperimentConfig {
                p,
                s,
                m2: 1.0 / s as f64,
                n_grid: vec![32, 64, 128, 256, 512],
                decoders: vec![DecoderKind::Omp],
                ..base
            }
        }
        "linear-regime" => {
            let p = 64usize;
            let s = p.div_ceil(8);
            ExperimentConfig {
                p,
                s,
                m2: linear_m2(s),
                n_grid: vec![16, 24, 32, 48, 64],
                decoders: vec![DecoderKind::Omp, DecoderKind::Lasso],
                ..base
            }
        }
        "lasso-gap" => {
            let p = 32usize;
            let s = p.div_ceil(8);
            ExperimentConfig {
                p,
                s,
                m2: linear_m2(s),
                n_grid: vec![8, 12, 16, 24, 32],
                decoders: vec![DecoderKind::Exhaustive, DecoderKind::Lasso],
                ..base
            }
        }
        other => {
            return domain(format!(
                "unknown preset `{other}`; available: {}",
                PRESET_NAMES.join(", ")
            ))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_arithmetic() {
        let c = preset("sublinear-regime").unwrap();
        assert_eq!((c.p, c.s), (256, 16));
        assert_eq!(c.m2, 0.0625);
        let c = preset("linear-regime").unwrap();
        assert_eq!(c.s * 8, c.p);
        assert!((c.m2 - 0.5 * 8f64.ln()).abs() < 1e-15);
        let c = preset("lasso-gap").unwrap();
        assert_eq!(c.s * 8, c.p);
        assert_eq!(c.decoders, vec![DecoderKind::Exhaustive, DecoderKind::Lasso]);
    }

    #[test]
    fn unknown_preset_lists_names() {
        let err = preset("quadratic").unwrap_err().to_string();
        for name in PRESET_NAMES {
            assert!(err.contains(name));
        }
    }
}
