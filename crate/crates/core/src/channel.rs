//! Path loss and attenuation vectors.
//!
//! The attenuation seen by base station `n` is the sum, in dB, of a
//! deterministic path-loss term (free-space for line-of-sight links, a
//! macro-cell formula for the rest) and that station's shadowing field
//! sampled at the transmitter position.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{distance, Position, Scenario};
use crate::shadowing::ShadowingField;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Per-BS attenuation values in dB, ordered like the scenario's base stations.
pub type AttenuationVector = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Carrier frequency, Hz.
    pub f0_hz: f64,
    /// Shadowing standard deviation, dB.
    pub sigma_s_db: f64,
    /// Shadowing decorrelation distance, m.
    pub d_c_m: f64,
    /// Base-station antenna elevation, m.
    pub h_ap_m: f64,
    /// Propagation speed, m/s.
    pub c: f64,
}

impl Default for ChannelParams {
    /// 2.12 GHz carrier, 8 dB shadowing, 75 m decorrelation, 15 m masts.
    fn default() -> Self {
        Self {
            f0_hz: 2.12e9,
            sigma_s_db: 8.0,
            d_c_m: 75.0,
            h_ap_m: 15.0,
            c: SPEED_OF_LIGHT,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.f0_hz, self.d_c_m, self.h_ap_m, self.c];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(
                "f0, d_c, h_ap and c must be positive and finite".into(),
            ));
        }
        if !(self.sigma_s_db >= 0.0 && self.sigma_s_db.is_finite()) {
            return Err(Error::InvalidParameter("sigma_s must be >= 0".into()));
        }
        Ok(())
    }

    /// Same parameters without shadowing.
    pub fn without_shadowing(self) -> Self {
        Self {
            sigma_s_db: 0.0,
            ..self
        }
    }

    /// Distance at which the free-space loss is exactly 0 dB.
    pub fn unit_loss_distance(&self) -> f64 {
        self.c / (4.0 * PI * self.f0_hz)
    }
}

/// Free-space path loss of a line-of-sight link, dB.
pub fn path_loss_los_db(d: f64, params: &ChannelParams) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::NonpositiveDistance(d));
    }
    Ok(20.0 * (params.f0_hz * 4.0 * PI * d / params.c).log10())
}

/// Macro-cell path loss of a non-line-of-sight link, dB. The carrier enters
/// the frequency term in MHz.
pub fn path_loss_nlos_db(d: f64, params: &ChannelParams) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::NonpositiveDistance(d));
    }
    let h = params.h_ap_m;
    if !(h > 0.0) {
        return Err(Error::NonpositiveHeight(h));
    }
    let f_mhz = params.f0_hz / 1e6;
    Ok(40.0 * (1.0 - 4e-3 * h) * (d / 1e3).log10() - 18.0 * h.log10()
        + 21.0 * f_mhz.log10()
        + 80.0)
}

/// Attenuation from `ue` to every base station of `scenario`.
///
/// `fields` holds one shadowing field per base station; an empty slice means
/// no shadowing at all.
pub fn attenuation_vector<S: Scenario>(
    scenario: &S,
    fields: &[ShadowingField],
    params: &ChannelParams,
    ue: Position,
) -> Result<AttenuationVector> {
    let n_bs = scenario.n_bs();
    if !fields.is_empty() && fields.len() != n_bs {
        return Err(Error::FieldCount {
            expected: n_bs,
            got: fields.len(),
        });
    }
    scenario
        .bs_positions()
        .iter()
        .enumerate()
        .map(|(n, bs)| {
            let d = distance(ue, *bs);
            let pl = if scenario.is_los(ue, n) {
                path_loss_los_db(d, params)?
            } else {
                path_loss_nlos_db(d, params)?
            };
            let shadow = match fields.get(n) {
                Some(field) => field.value_at(ue)?,
                None => 0.0,
            };
            Ok(pl + shadow)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CircularScenario, StreetScenario};
    use crate::shadowing::{FieldMethod, ShadowingGenerator};

    #[test]
    fn los_examples() {
        let p = ChannelParams::default();
        let d0 = p.unit_loss_distance();
        assert!(path_loss_los_db(d0, &p).unwrap().abs() < 1e-12);
        let a = path_loss_los_db(37.0, &p).unwrap();
        let b = path_loss_los_db(74.0, &p).unwrap();
        assert!((b - a - 20.0 * 2f64.log10()).abs() < 1e-12);
        assert!((b - a - 6.0206).abs() < 1e-4);
        // 20*log10(2.12e9 * 4*pi * 100 / 299792458), evaluated by hand.
        let pl100 = path_loss_los_db(100.0, &p).unwrap();
        let expected = 20.0 * (2.12e9 * 4.0 * PI * 100.0 / 299_792_458.0f64).log10();
        assert!((pl100 - expected).abs() < 1e-12);
        assert!((pl100 - 78.97).abs() < 0.01, "{pl100}");
        assert!(matches!(path_loss_los_db(0.0, &p), Err(Error::NonpositiveDistance(_))));
        assert!(path_loss_los_db(-3.0, &p).is_err());
    }

    #[test]
    fn nlos_examples() {
        let p = ChannelParams::default();
        let at_1km = path_loss_nlos_db(1000.0, &p).unwrap();
        let by_hand = -18.0 * 15f64.log10() + 21.0 * 2120f64.log10() + 80.0;
        assert!((at_1km - by_hand).abs() < 1e-12);
        assert!((at_1km - 128.7).abs() < 0.05, "{at_1km}");
        let at_2km = path_loss_nlos_db(2000.0, &p).unwrap();
        assert!((at_2km - at_1km - 40.0 * 0.94 * 2f64.log10()).abs() < 1e-12);
        assert!((at_2km - at_1km - 11.32).abs() < 0.01);
        let no_mast = ChannelParams {
            h_ap_m: 0.0,
            ..p
        };
        assert!(matches!(
            path_loss_nlos_db(10.0, &no_mast),
            Err(Error::NonpositiveHeight(_))
        ));
        assert!(path_loss_nlos_db(0.0, &p).is_err());
    }

    #[test]
    fn path_loss_monotone() {
        let p = ChannelParams::default();
        let mut prev = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for k in 1..2000 {
            let d = k as f64 * 0.5;
            let cur = (
                path_loss_los_db(d, &p).unwrap(),
                path_loss_nlos_db(d, &p).unwrap(),
            );
            assert!(cur.0 > prev.0 && cur.1 > prev.1);
            prev = cur;
        }
    }

    #[test]
    fn vector_without_shadowing_is_path_loss() {
        let s = StreetScenario::paper_default();
        let p = ChannelParams::default().without_shadowing();
        let ue = Position::new(100.0, 100.0);
        let a = attenuation_vector(&s, &[], &p, ue).unwrap();
        assert_eq!(a.len(), 5);
        for (n, bs) in s.bs_positions().iter().enumerate() {
            // Inside a building: all links are NLOS.
            assert_eq!(a[n], path_loss_nlos_db(distance(ue, *bs), &p).unwrap());
        }
        assert_eq!(a, attenuation_vector(&s, &[], &p, ue).unwrap());

        let street_ue = Position::new(40.0, 262.0);
        let a = attenuation_vector(&s, &[], &p, street_ue).unwrap();
        let d0 = distance(street_ue, s.bs_positions()[0]);
        assert_eq!(a[0], path_loss_los_db(d0, &p).unwrap());
        let d2 = distance(street_ue, s.bs_positions()[2]);
        assert_eq!(a[2], path_loss_nlos_db(d2, &p).unwrap());
    }

    #[test]
    fn vector_adds_shadowing() {
        let s = StreetScenario::paper_default();
        let p = ChannelParams::default();
        let gen = ShadowingGenerator::new(s.bounds(), &p, 5.0, FieldMethod::Circulant).unwrap();
        let fields: Vec<_> = (0..5).map(|n| gen.generate(n)).collect();
        let ue = Position::new(131.0, 77.0);
        let shadowed = attenuation_vector(&s, &fields, &p, ue).unwrap();
        let clean = attenuation_vector(&s, &[], &p, ue).unwrap();
        for n in 0..5 {
            let diff = shadowed[n] - clean[n];
            assert!((diff - fields[n].value_at(ue).unwrap()).abs() < 1e-9);
        }
        assert!(matches!(
            attenuation_vector(&s, &fields[..2], &p, ue),
            Err(Error::FieldCount { .. })
        ));
    }

    #[test]
    fn circular_is_single_los_link() {
        let c = CircularScenario::paper_default();
        let p = ChannelParams::default().without_shadowing();
        let ue = Position::new(3.0, 4.0);
        let a = attenuation_vector(&c, &[], &p, ue).unwrap();
        assert_eq!(a, vec![path_loss_los_db(5.0, &p).unwrap()]);
    }
}
