//! Scalar radiometric and electrical relations.
//!
//! Every noise quantity here is an electrical power in A².

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Elementary charge, C.
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;

/// `cos` of an angle in degrees, exact at the multiples of 60° and 90°.
pub fn cos_deg(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    match r {
        0.0 => 1.0,
        60.0 | 300.0 => 0.5,
        90.0 | 270.0 => 0.0,
        120.0 | 240.0 => -0.5,
        180.0 => -1.0,
        _ => deg.to_radians().cos(),
    }
}

/// Lambertian mode number for a given half-power semi-angle, so that
/// `cos^n(semi_angle) = 1/2`.
pub fn lambertian_order(semi_angle_deg: f64) -> Result<f64> {
    if !(semi_angle_deg > 0.0 && semi_angle_deg < 90.0) {
        return Err(Error::InvalidArgument(format!(
            "half-power semi-angle must lie in (0, 90) degrees, got {semi_angle_deg}"
        )));
    }
    Ok(-std::f64::consts::LN_2 / cos_deg(semi_angle_deg).ln())
}

/// Electrical signal power `(R·PO)²` of a received optical power.
pub fn electrical_power(responsivity: f64, optical_power: f64) -> f64 {
    let i = responsivity * optical_power;
    i * i
}

/// Shot noise `2e·(R·PO)·B_o·B_e` caused by unmodulated received light.
pub fn shot_noise(responsivity: f64, unmodulated_power: f64, params: &NoiseParams) -> f64 {
    2.0 * ELECTRON_CHARGE
        * (responsivity * unmodulated_power)
        * params.optical_pass_factor
        * params.electrical_bandwidth
}

/// Receiver (preamplifier) noise `N_R·B_E`.
pub fn receiver_noise(params: &NoiseParams) -> f64 {
    params.noise_density() * params.electrical_bandwidth
}

/// Receiver noise parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    /// Input-referred noise current spectral density, A/√Hz.
    pub current_density: f64,
    /// Electrical bandwidth `B_E`, Hz.
    pub electrical_bandwidth: f64,
    /// Dimensionless pass-through factor multiplying the shot-noise term.
    #[serde(default = "default_pass_factor")]
    pub optical_pass_factor: f64,
}

fn default_pass_factor() -> f64 {
    1.0
}

impl NoiseParams {
    /// Noise power density `N_R`, A²/Hz.
    pub fn noise_density(&self) -> f64 {
        self.current_density * self.current_density
    }

    /// The same receiver with another electrical bandwidth.
    pub fn with_bandwidth(&self, electrical_bandwidth: f64) -> NoiseParams {
        NoiseParams {
            electrical_bandwidth,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.current_density) || !ok(self.electrical_bandwidth) || !ok(self.optical_pass_factor) {
            return Err(Error::InvalidConfig(format!(
                "noise parameters must be finite and positive: {self:?}"
            )));
        }
        Ok(())
    }
}

impl Default for NoiseParams {
    /// 4.47 pA/√Hz over 5 GHz.
    fn default() -> Self {
        NoiseParams {
            current_density: 4.47e-12,
            electrical_bandwidth: 5e9,
            optical_pass_factor: 1.0,
        }
    }
}

/// Photodetector responsivity per wavelength name, A/W.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResponsivityTable(pub BTreeMap<String, f64>);

impl ResponsivityTable {
    /// Red 0.4, yellow 0.35, green 0.3, blue 0.2 A/W.
    pub fn rygb() -> Self {
        ResponsivityTable(
            [("red", 0.4), ("yellow", 0.35), ("green", 0.3), ("blue", 0.2)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        )
    }

    pub fn get(&self, wavelength: &str) -> Option<f64> {
        self.0.get(wavelength).copied()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in &self.0 {
            if !(*r > 0.0 && *r <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "responsivity of `{name}` must lie in (0, 1] A/W, got {r}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table4() -> NoiseParams {
        NoiseParams::default()
    }

    #[test]
    fn order_of_sixty_degrees_is_exactly_one() {
        assert_eq!(lambertian_order(60.0).unwrap(), 1.0);
    }

    #[test]
    fn order_matches_log_formula() {
        // frozen from -ln2 / ln(cos x) evaluated independently
        assert!((lambertian_order(19.0).unwrap() - 12.372_823_867).abs() < 1e-6);
        assert!((lambertian_order(19.0).unwrap() - 12.3733).abs() < 1e-3);
        assert!((lambertian_order(30.0).unwrap() - 4.8189).abs() < 1e-3);
    }

    #[test]
    fn order_rejects_out_of_range() {
        for bad in [0.0, -5.0, 90.0, 120.0, f64::NAN] {
            assert!(lambertian_order(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn electrical_power_cases() {
        assert!((electrical_power(0.4, 1e-6) - 1.6e-13).abs() < 1e-27);
        assert_eq!(electrical_power(0.4, 0.0), 0.0);
        let p = electrical_power(0.3, 2e-6);
        let p2 = electrical_power(0.3, 4e-6);
        assert!((p2 / p - 4.0).abs() < 1e-12);
    }

    #[test]
    fn shot_noise_cases() {
        let params = NoiseParams {
            optical_pass_factor: 1.0,
            electrical_bandwidth: 5e9,
            ..table4()
        };
        assert!((shot_noise(0.4, 1e-6, &params) - 6.4087e-16).abs() < 1e-19);
        assert_eq!(shot_noise(0.4, 0.0, &params), 0.0);
        let doubled = shot_noise(0.4, 1e-6, &params.with_bandwidth(1e10));
        assert!((doubled / shot_noise(0.4, 1e-6, &params) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn receiver_noise_cases() {
        assert!((receiver_noise(&table4()) - 9.991e-14).abs() < 1e-16);
        assert_eq!(receiver_noise(&table4().with_bandwidth(0.0)), 0.0);
        let r1 = receiver_noise(&table4().with_bandwidth(1e9));
        let r3 = receiver_noise(&table4().with_bandwidth(3e9));
        assert!((r3 / r1 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn builtin_responsivities() {
        let t = ResponsivityTable::rygb();
        t.validate().unwrap();
        assert_eq!(t.get("yellow"), Some(0.35));
        assert_eq!(t.get("infrared"), None);
    }

    proptest! {
        #[test]
        fn order_inverts_half_power(angle in 0.5f64..89.5) {
            let n = lambertian_order(angle).unwrap();
            prop_assert!(n > 0.0);
            prop_assert!((cos_deg(angle).powf(n) - 0.5).abs() < 1e-12);
        }

        #[test]
        fn noise_terms_non_negative(r in 0.01f64..1.0, po in 0.0f64..1e-2, b in 1.0f64..1e11) {
            let p = table4().with_bandwidth(b);
            prop_assert!(electrical_power(r, po) >= 0.0);
            prop_assert!(shot_noise(r, po, &p) >= 0.0);
            prop_assert!(receiver_noise(&p) > 0.0);
        }
    }
}
