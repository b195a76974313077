use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Practical default for the density threshold.
pub const DEFAULT_EPSILON: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonMode {
    /// Derive ε from the scale, density and admissible-set constants.
    Strict,
    /// Use a configured ε; the cascade's density guarantee is waived.
    Practical,
}

/// Inputs to [`choose_epsilon`] beyond the dimension data.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibratedConstants {
    pub c_scale: Option<f64>,
    pub c_maxdensity: Option<f64>,
    pub c_adm: Option<u64>,
    pub practical_epsilon: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonConfig<T> {
    pub mode: EpsilonMode,
    pub epsilon: T,
    pub log10_epsilon: f64,
    pub c_scale: Option<f64>,
    pub c_maxdensity: Option<f64>,
    pub c_adm: Option<u64>,
    /// Set in practical mode: no density bound is promised downstream.
    pub guarantee_waived: bool,
    /// The strict value is below the smallest normal number of the scalar.
    pub underflow: bool,
}

/// Selects the density threshold ε.
///
/// Strict mode returns the largest float strictly below
/// `C_maxdensity / (C_adm · (3^n · C_scale)^C_adm)`, evaluated in the
/// log domain; practical mode returns the configured value (default 0.3).
pub fn choose_epsilon<T: Real>(
    n: usize,
    _m: T,
    mode: EpsilonMode,
    consts: &CalibratedConstants,
) -> Result<EpsilonConfig<T>> {
    match mode {
        EpsilonMode::Practical => {
            let e = consts.practical_epsilon.unwrap_or(DEFAULT_EPSILON);
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::Configuration(format!("epsilon must lie in (0,1), got {e}")));
            }
            Ok(EpsilonConfig {
                mode,
                epsilon: T::lit(e),
                log10_epsilon: e.log10(),
                c_scale: consts.c_scale,
                c_maxdensity: consts.c_maxdensity,
                c_adm: consts.c_adm,
                guarantee_waived: true,
                underflow: false,
            })
        }
        EpsilonMode::Strict => {
            let (Some(cs), Some(cmd), Some(cadm)) = (consts.c_scale, consts.c_maxdensity, consts.c_adm) else {
                return Err(Error::Configuration(
                    "strict epsilon needs C_scale, C_maxdensity and C_adm".into(),
                ));
            };
            if !(cs > 0.0 && cmd > 0.0 && cadm > 0) {
                return Err(Error::Configuration("strict constants must be positive".into()));
            }
            let log10 = cmd.log10()
                - (cadm as f64).log10()
                - cadm as f64 * (3f64.powi(n as i32) * cs).log10();
            // direct evaluation when it stays in range, the log form otherwise;
            // both are nudged down so the result sits strictly below the bound
            let scale = (3f64.powi(n as i32) * cs).powf(cadm as f64) * cadm as f64;
            let direct = cmd / scale;
            let e64 = if scale.is_finite() && direct.is_normal() {
                direct * (1.0 - 8.0 * f64::EPSILON)
            } else {
                10f64.powf(log10) * (1.0 - 1e-12)
            };
            let epsilon = T::lit(e64) * (T::one() - T::lit(4.0) * T::epsilon());
            let underflow = !(epsilon >= T::min_positive_value());
            Ok(EpsilonConfig {
                mode,
                epsilon,
                log10_epsilon: log10,
                c_scale: Some(cs),
                c_maxdensity: Some(cmd),
                c_adm: Some(cadm),
                guarantee_waived: false,
                underflow,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn practical_default() {
        let e: EpsilonConfig<f64> =
            choose_epsilon(2, 1.5, EpsilonMode::Practical, &CalibratedConstants::default()).unwrap();
        assert_eq!(e.epsilon, 0.3);
        assert!(e.guarantee_waived);
    }

    #[test]
    fn strict_formula() {
        let c = CalibratedConstants {
            c_scale: Some(10.0),
            c_maxdensity: Some(0.01),
            c_adm: Some(50),
            practical_epsilon: None,
        };
        let e: EpsilonConfig<f64> = choose_epsilon(2, 1.5, EpsilonMode::Strict, &c).unwrap();
        let expect = 0.01 / (50.0 * 90f64.powi(50));
        assert!((e.epsilon - expect).abs() <= 1e-12 * expect);
        assert!(e.epsilon < expect);
        assert!(!e.underflow);
        let f: EpsilonConfig<f32> = choose_epsilon(2, 1.5, EpsilonMode::Strict, &c).unwrap();
        assert!(f.underflow);
    }

    #[test]
    fn strict_needs_constants() {
        let c = CalibratedConstants {
            c_scale: None,
            c_maxdensity: Some(0.01),
            c_adm: Some(50),
            practical_epsilon: None,
        };
        assert!(matches!(
            choose_epsilon::<f64>(2, 1.5, EpsilonMode::Strict, &c),
            Err(Error::Configuration(_))
        ));
    }
}
