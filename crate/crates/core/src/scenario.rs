//! Link topology, per-path noise, rate sweeps and reach search.
//!
//! Classical traffic runs from Alice to Bob through the relay. On Alice's
//! segment it co-propagates with her quantum signal (forward Raman); on
//! Bob's segment it runs against his (backward Raman).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channel_plan::ChannelPlan;
use crate::error::{Error, Result};
use crate::noise::{
    excess_noise_snu, fwm_total_power, lcxt_power, photon_probability, raman_backward, raman_forward,
    DetectionParams, DwdmParams, FiberSpec, FwmParams, NoiseBudget, RamanTable,
};
use crate::security::{key_fraction, EquivalentChannel, ProtocolParams, RateBreakdown};
use crate::units;

pub const DEFAULT_RESOLUTION_KM: f64 = 0.01;
const COARSE_SCAN_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RamanMode {
    Forward,
    Backward,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSettings {
    pub raman: RamanMode,
    pub fwm: bool,
    pub lcxt: bool,
}

impl PathSettings {
    pub const QUIET: PathSettings = PathSettings {
        raman: RamanMode::Off,
        fwm: false,
        lcxt: false,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Path {
    Alice,
    Bob,
}

/// Splits a total length so that L_a / L_b = ratio.
pub fn split_lengths(total_km: f64, ratio: f64) -> Result<(f64, f64)> {
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::invalid(format!(
            "asymmetry ratio must be positive, got {ratio}"
        )));
    }
    if !(total_km >= 0.0) || !total_km.is_finite() {
        return Err(Error::invalid(format!(
            "total length must be >= 0, got {total_km}"
        )));
    }
    let bob = total_km / (1.0 + ratio);
    Ok((total_km - bob, bob))
}

#[derive(Debug, Clone)]
pub struct LinkScenario {
    pub length_alice_km: f64,
    pub length_bob_km: f64,
    /// L_a / L_b used when the scenario is re-placed at another total length.
    pub asymmetry_ratio: f64,
    pub plan: ChannelPlan,
    pub fiber: FiberSpec,
    pub dwdm: DwdmParams,
    pub detection: DetectionParams,
    pub fwm: FwmParams,
    pub protocol: ProtocolParams,
    pub raman_table: Arc<RamanTable>,
    pub alice: PathSettings,
    pub bob: PathSettings,
    /// Traffic-independent excess noise on each side, SNU.
    pub baseline_excess_snu: f64,
}

impl LinkScenario {
    pub fn validate(&self) -> Result<()> {
        self.dwdm.validate()?;
        self.detection.validate()?;
        self.fwm.validate()?;
        self.protocol.validate()?;
        if !(self.baseline_excess_snu >= 0.0) {
            return Err(Error::invalid("baseline excess noise must be >= 0"));
        }
        if !(self.asymmetry_ratio > 0.0) {
            return Err(Error::invalid("asymmetry ratio must be positive"));
        }
        Ok(())
    }

    /// Same link with the total fiber length set to `total_km`, split by the
    /// scenario's asymmetry ratio.
    pub fn at_total_length(&self, total_km: f64) -> Result<LinkScenario> {
        let (a, b) = split_lengths(total_km, self.asymmetry_ratio)?;
        Ok(LinkScenario {
            length_alice_km: a,
            length_bob_km: b,
            ..self.clone()
        })
    }

    pub fn total_length_km(&self) -> f64 {
        self.length_alice_km + self.length_bob_km
    }

    /// Fiber attenuation at the quantum wavelength, dB/km.
    pub fn quantum_attenuation(&self) -> f64 {
        self.fiber
            .attenuation_db_per_km(self.plan.quantum_wavelength_nm())
    }

    fn path(&self, path: Path) -> (f64, PathSettings) {
        match path {
            Path::Alice => (self.length_alice_km, self.alice),
            Path::Bob => (self.length_bob_km, self.bob),
        }
    }
}

/// Noise reaching the relay's quantum receiver from one segment.
pub fn path_noise(scenario: &LinkScenario, path: Path) -> Result<NoiseBudget> {
    let (length, settings) = scenario.path(path);
    let plan = &scenario.plan;
    let lambda_q = plan.quantum_wavelength_nm();
    let p_out_w = plan.output_power_w();
    let filter_nm = units::bandwidth_hz_to_nm(scenario.dwdm.filter_bandwidth_hz, lambda_q)?;
    let table = scenario.raman_table.as_ref();

    let p_raman_w = match settings.raman {
        RamanMode::Forward => raman_forward(p_out_w, length, plan, table, filter_nm)?,
        RamanMode::Backward => {
            let xi = scenario.fiber.loss_coefficient_per_km(lambda_q);
            raman_backward(p_out_w, length, xi, plan, table, filter_nm)?
        }
        RamanMode::Off => 0.0,
    };
    let p_fwm_w = if settings.fwm {
        fwm_total_power(plan, &scenario.fiber, &scenario.fwm, length)?
    } else {
        0.0
    };
    let p_lcxt_w = if settings.lcxt {
        lcxt_power(plan.output_power_dbm(), scenario.dwdm.isolation_db)?
    } else {
        0.0
    };

    let det = &scenario.detection;
    let prob_raman = photon_probability(p_raman_w, lambda_q, det)?;
    let prob_fwm = photon_probability(p_fwm_w, lambda_q, det)?;
    let prob_lcxt = photon_probability(p_lcxt_w, lambda_q, det)?;
    Ok(NoiseBudget {
        p_raman_w,
        p_fwm_w,
        p_lcxt_w,
        prob_raman,
        prob_fwm,
        prob_lcxt,
        baseline_snu: scenario.baseline_excess_snu,
        excess_noise_snu: scenario.baseline_excess_snu + excess_noise_snu(prob_raman + prob_fwm + prob_lcxt),
    })
}

pub fn rate_at(scenario: &LinkScenario) -> Result<RateBreakdown> {
    let alpha = scenario.quantum_attenuation();
    let eta_a = units::transmittance(alpha, scenario.length_alice_km)?;
    let eta_b = units::transmittance(alpha, scenario.length_bob_km)?;
    if eta_a == 0.0 || eta_b == 0.0 {
        return Err(Error::numerical("channel transmittance underflowed to zero"));
    }
    let xi_a = path_noise(scenario, Path::Alice)?.excess_noise_snu;
    let xi_b = path_noise(scenario, Path::Bob)?.excess_noise_snu;
    let channel = EquivalentChannel::new(&scenario.protocol, eta_a, eta_b, xi_a, xi_b)?;
    key_fraction(&scenario.protocol, &channel)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub total_length_km: f64,
    pub length_alice_km: f64,
    pub length_bob_km: f64,
    pub xi_a_snu: f64,
    pub xi_b_snu: f64,
    pub xi_prime_snu: f64,
    pub mutual_information_bits: f64,
    pub holevo_bits: f64,
    pub key_fraction_bits: f64,
    #[serde(skip)]
    pub raw_key_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Reach refined between the last positive-rate grid point and the
    /// following one; `None` when no such crossing lies inside the grid.
    pub max_distance_km: Option<f64>,
}

fn sweep_row(template: &LinkScenario, total_km: f64) -> Result<SweepRow> {
    let s = template.at_total_length(total_km)?;
    let r = rate_at(&s)?;
    Ok(SweepRow {
        total_length_km: total_km,
        length_alice_km: s.length_alice_km,
        length_bob_km: s.length_bob_km,
        xi_a_snu: r.channel.xi_a,
        xi_b_snu: r.channel.xi_b,
        xi_prime_snu: r.channel.xi_prime,
        mutual_information_bits: r.mutual_information,
        holevo_bits: r.holevo_bound,
        key_fraction_bits: r.key_fraction,
        raw_key_fraction: r.raw_key_fraction,
    })
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::invalid("sweep lengths must be finite and >= 0"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("sweep lengths must be strictly increasing"));
    }
    Ok(())
}

/// Evaluates the template at each total length. Grid points run in parallel
/// when the `parallel` feature is on; rows come back in grid order.
pub fn sweep(template: &LinkScenario, total_lengths_km: &[f64]) -> Result<SweepResult> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        check_grid(total_lengths_km)?;
        template.validate()?;
        let rows = total_lengths_km
            .par_iter()
            .map(|&l| sweep_row(template, l))
            .collect::<Result<Vec<_>>>()?;
        finish_sweep(template, rows)
    }
    #[cfg(not(feature = "parallel"))]
    sweep_serial(template, total_lengths_km)
}

pub fn sweep_serial(template: &LinkScenario, total_lengths_km: &[f64]) -> Result<SweepResult> {
    check_grid(total_lengths_km)?;
    template.validate()?;
    let rows = total_lengths_km
        .iter()
        .map(|&l| sweep_row(template, l))
        .collect::<Result<Vec<_>>>()?;
    finish_sweep(template, rows)
}

fn finish_sweep(template: &LinkScenario, rows: Vec<SweepRow>) -> Result<SweepResult> {
    let last_positive = rows.iter().rposition(|r| r.raw_key_fraction > 0.0);
    let max_distance_km = match last_positive {
        Some(n) if n + 1 < rows.len() => Some(refine_crossing(
            template,
            rows[n].total_length_km,
            rows[n + 1].total_length_km,
            DEFAULT_RESOLUTION_KM,
        )?),
        _ => None,
    };
    Ok(SweepResult {
        rows,
        max_distance_km,
    })
}

fn raw_rate(template: &LinkScenario, total_km: f64) -> Result<f64> {
    Ok(rate_at(&template.at_total_length(total_km)?)?.raw_key_fraction)
}

/// Bisects on the raw rate between a positive point `lo` and a non-positive
/// point `hi`; returns the positive end of the final bracket.
fn refine_crossing(template: &LinkScenario, mut lo: f64, mut hi: f64, resolution: f64) -> Result<f64> {
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if raw_rate(template, mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Largest total length with a positive key fraction, to within
/// `resolution_km`. A coarse scan over `[0, upper_bound_km]` locates the last
/// sign change, so non-monotone rate curves are handled. Returns
/// `upper_bound_km` when the rate is still positive there and `None` when it
/// is not positive at zero length.
pub fn max_distance(template: &LinkScenario, upper_bound_km: f64, resolution_km: f64) -> Result<Option<f64>> {
    if !(upper_bound_km > 0.0) || !(resolution_km > 0.0) {
        return Err(Error::invalid("upper bound and resolution must be positive"));
    }
    template.validate()?;
    if raw_rate(template, 0.0)? <= 0.0 {
        return Ok(None);
    }
    let steps = ((upper_bound_km / resolution_km).ceil() as usize).clamp(1, COARSE_SCAN_POINTS);
    let grid: Vec<f64> = (0..=steps)
        .map(|n| upper_bound_km * n as f64 / steps as f64)
        .collect();
    let rates = grid
        .iter()
        .map(|&l| raw_rate(template, l))
        .collect::<Result<Vec<_>>>()?;
    let last = rates.iter().rposition(|&r| r > 0.0).unwrap_or(0);
    if last == grid.len() - 1 {
        return Ok(Some(upper_bound_km));
    }
    refine_crossing(template, grid[last], grid[last + 1], resolution_km).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_plan::build_configuration;
    use approx::assert_relative_eq;

    fn scenario(config: u32, ratio: f64) -> LinkScenario {
        crate::config::RunConfig::reference()
            .scenario(
                &build_configuration(config, -24.0).unwrap(),
                ratio,
                Arc::new(RamanTable::bundled()),
            )
            .unwrap()
    }

    fn quiet(mut s: LinkScenario) -> LinkScenario {
        s.alice = PathSettings::QUIET;
        s.bob = PathSettings::QUIET;
        s
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_lengths(10.0, 1.0).unwrap(), (5.0, 5.0));
        let (a, b) = split_lengths(10.0, 2.0).unwrap();
        assert_relative_eq!(a, 20.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(b, 10.0 / 3.0, max_relative = 1e-15);
        assert_eq!(split_lengths(0.0, 1.5).unwrap(), (0.0, 0.0));
        assert!(split_lengths(10.0, 0.0).is_err());
        assert!(split_lengths(10.0, -1.0).is_err());
    }

    #[test]
    fn split_preserves_ratio() {
        for (t, r) in [(7.3, 1.5), (1.0, 2.0), (100.0, 0.25)] {
            let (a, b) = split_lengths(t, r).unwrap();
            assert!((a - r * b).abs() <= 1e-9);
            assert!((a + b - t).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_length_noise_is_baseline() {
        let mut s = scenario(1, 1.0).at_total_length(0.0).unwrap();
        s.alice.lcxt = false;
        s.bob.lcxt = false;
        for p in [Path::Alice, Path::Bob] {
            let n = path_noise(&s, p).unwrap();
            assert_eq!(n.excess_noise_snu, s.baseline_excess_snu);
        }
    }

    #[test]
    fn o_band_alice_has_no_fwm() {
        let s = scenario(2, 1.0).at_total_length(4.0).unwrap();
        assert!(s.alice.fwm);
        assert_eq!(path_noise(&s, Path::Alice).unwrap().p_fwm_w, 0.0);
    }

    #[test]
    fn backward_exceeds_forward_at_equal_length() {
        let s = scenario(1, 1.0).at_total_length(6.0).unwrap();
        let a = path_noise(&s, Path::Alice).unwrap();
        let b = path_noise(&s, Path::Bob).unwrap();
        assert!(b.p_raman_w > a.p_raman_w);
        assert!(a.p_raman_w > 0.0);
    }

    #[test]
    fn lossless_composition_matches_security_core() {
        let mut s = quiet(scenario(1, 1.0)).at_total_length(0.0).unwrap();
        s.baseline_excess_snu = 0.0;
        let r = rate_at(&s).unwrap();
        assert_relative_eq!(r.key_fraction, 2.622_756_093_801_261, max_relative = 1e-11);
    }

    #[test]
    fn rate_decreases_with_length() {
        let s = scenario(1, 1.0);
        let r0 = rate_at(&s.at_total_length(0.0).unwrap()).unwrap().key_fraction;
        let r2 = rate_at(&s.at_total_length(2.0).unwrap()).unwrap().key_fraction;
        assert!(r2 > 0.0 && r2 < r0);
    }

    #[test]
    fn quiet_rate_depends_only_on_transmittances() {
        let s = quiet(scenario(3, 1.0));
        let mut other = quiet(scenario(1, 1.0));
        other.plan = build_configuration(1, -10.0).unwrap();
        let a = rate_at(&s.at_total_length(3.0).unwrap()).unwrap();
        let b = rate_at(&other.at_total_length(3.0).unwrap()).unwrap();
        assert_eq!(a.raw_key_fraction, b.raw_key_fraction);
    }

    #[test]
    fn sweep_examples() {
        let s = scenario(1, 1.5);
        let one = sweep(&s, &[0.0]).unwrap();
        assert_eq!(one.rows.len(), 1);
        assert!(one.rows[0].key_fraction_bits > 0.0);

        let empty = sweep(&s, &[]).unwrap();
        assert!(empty.rows.is_empty());
        assert_eq!(empty.max_distance_km, None);

        let grid: Vec<f64> = (0..=60).map(|n| n as f64 * 0.25).collect();
        let res = sweep(&s, &grid).unwrap();
        assert!(res
            .rows
            .windows(2)
            .all(|w| w[1].key_fraction_bits <= w[0].key_fraction_bits));
        let md = res.max_distance_km.expect("crossing inside 15 km");
        let last_pos = res.rows.iter().rposition(|r| r.key_fraction_bits > 0.0).unwrap();
        assert!(md >= res.rows[last_pos].total_length_km && md <= res.rows[last_pos + 1].total_length_km);

        assert!(sweep(&s, &[1.0, 1.0]).is_err());
        assert!(sweep(&s, &[-1.0]).is_err());
    }

    #[test]
    fn serial_and_parallel_agree() {
        let s = scenario(3, 2.0);
        let grid: Vec<f64> = (0..40).map(|n| n as f64 * 0.3).collect();
        assert_eq!(sweep(&s, &grid).unwrap(), sweep_serial(&s, &grid).unwrap());
    }

    #[test]
    fn max_distance_saturated_noise() {
        let mut s = scenario(1, 1.0);
        s.baseline_excess_snu = 50.0;
        assert_eq!(max_distance(&s, 20.0, 0.01).unwrap(), None);
    }

    #[test]
    fn max_distance_reaches_bound_without_noise() {
        let mut s = quiet(scenario(1, 1.0));
        s.baseline_excess_snu = 0.0;
        assert_eq!(max_distance(&s, 2.0, 0.01).unwrap(), Some(2.0));
    }

    #[test]
    fn max_distance_brackets_sign_change() {
        let s = scenario(1, 1.0);
        let md = max_distance(&s, 30.0, 0.01).unwrap().unwrap();
        assert!(raw_rate(&s, md).unwrap() > 0.0);
        assert!(raw_rate(&s, md + 0.01).unwrap() <= 0.0);
    }

    #[test]
    fn asymmetry_extends_reach() {
        let d: Vec<f64> = [1.0, 1.5, 2.0]
            .iter()
            .map(|&r| max_distance(&scenario(1, r), 30.0, 0.01).unwrap().unwrap())
            .collect();
        assert!(d[0] < d[1] && d[1] < d[2], "{d:?}");
    }
}
