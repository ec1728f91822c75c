//! Coexistence noise at the quantum receiver: spontaneous Raman scattering,
//! four-wave mixing and linear crosstalk, converted to detection
//! probabilities and excess noise in shot-noise units.

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel_plan::{enumerate_fwm_triples, ChannelPlan, FwmTriple};
use crate::error::{Error, Result};
use crate::units::{self, PhysicalConstants};

/// Bundled model-derived cross-section table (see the file header).
pub const BUNDLED_RAMAN_TABLE: &str = include_str!("../data/raman_silica.csv");

/// Quantum wavelengths are matched to a table row set within this distance.
const QUANTUM_MATCH_NM: f64 = 1e-6;

/// Effective spontaneous Raman cross-section ρ(λc, λq) in 1/(nm·km).
#[derive(Debug, Clone, PartialEq)]
pub struct RamanTable {
    // sorted by quantum wavelength; inner rows sorted by classical wavelength
    bands: Vec<(f64, Vec<(f64, f64)>)>,
}

#[derive(Deserialize)]
struct RamanRow {
    classical_wavelength_nm: f64,
    quantum_wavelength_nm: f64,
    rho_per_nm_per_km: f64,
}

impl RamanTable {
    pub fn from_rows(rows: impl IntoIterator<Item = (f64, f64, f64)>) -> Result<Self> {
        let mut bands: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        for (classical, quantum, rho) in rows {
            if !(rho >= 0.0) || !rho.is_finite() {
                return Err(Error::Data(format!(
                    "negative or non-finite cross-section {rho} at ({classical}, {quantum}) nm"
                )));
            }
            if !(classical > 0.0 && quantum > 0.0) {
                return Err(Error::Data(format!(
                    "non-positive wavelength in row ({classical}, {quantum})"
                )));
            }
            match bands
                .iter_mut()
                .find(|(q, _)| (q - quantum).abs() <= QUANTUM_MATCH_NM)
            {
                Some((_, pts)) => pts.push((classical, rho)),
                None => bands.push((quantum, vec![(classical, rho)])),
            }
        }
        if bands.is_empty() {
            return Err(Error::Data("Raman table has no rows".into()));
        }
        bands.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (q, pts) in &mut bands {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pts.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::Data(format!(
                    "duplicate classical wavelength in the {q} nm rows"
                )));
            }
        }
        Ok(RamanTable { bands })
    }

    /// Parses the comma-separated table format (`#` comment lines, header row).
    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let rows = rdr
            .deserialize::<RamanRow>()
            .map(|r| {
                r.map(|r| {
                    (
                        r.classical_wavelength_nm,
                        r.quantum_wavelength_nm,
                        r.rho_per_nm_per_km,
                    )
                })
                .map_err(|e| Error::Data(format!("malformed Raman table: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        Self::from_reader(text.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_reader(file)
    }

    pub fn bundled() -> Self {
        Self::from_csv_str(BUNDLED_RAMAN_TABLE).expect("bundled Raman table parses")
    }

    /// Constant cross-section over the given wavelength box. Handy for tests
    /// and for isolating other noise terms.
    pub fn flat(rho: f64, classical_nm: (f64, f64), quantum_nm: (f64, f64)) -> Result<Self> {
        let mut rows = Vec::new();
        for q in [quantum_nm.0, quantum_nm.1] {
            for c in [classical_nm.0, classical_nm.1] {
                rows.push((c, q, rho));
            }
        }
        rows.dedup();
        Self::from_rows(rows)
    }

    /// Interpolated ρ; queries outside the tabulated range are errors.
    pub fn rho(&self, classical_nm: f64, quantum_nm: f64) -> Result<f64> {
        let miss = || Error::RamanCoverage {
            classical_nm,
            quantum_nm,
        };
        let hi = self
            .bands
            .partition_point(|(q, _)| *q < quantum_nm - QUANTUM_MATCH_NM);
        let upper = self.bands.get(hi).ok_or_else(miss)?;
        if (upper.0 - quantum_nm).abs() <= QUANTUM_MATCH_NM {
            return interpolate(&upper.1, classical_nm).ok_or_else(miss);
        }
        let lower = hi.checked_sub(1).map(|n| &self.bands[n]).ok_or_else(miss)?;
        let r0 = interpolate(&lower.1, classical_nm).ok_or_else(miss)?;
        let r1 = interpolate(&upper.1, classical_nm).ok_or_else(miss)?;
        let t = (quantum_nm - lower.0) / (upper.0 - lower.0);
        Ok(r0 + t * (r1 - r0))
    }

    /// Σ_c ρ(λ_c, λ_q) over the classical channels of `plan`.
    pub fn plan_sum(&self, plan: &ChannelPlan) -> Result<f64> {
        let q = plan.quantum_wavelength_nm();
        plan.classical_wavelengths_nm().map(|c| self.rho(c, q)).sum()
    }
}

fn interpolate(pts: &[(f64, f64)], x: f64) -> Option<f64> {
    let first = pts.first()?;
    let last = pts.last()?;
    if x < first.0 || x > last.0 {
        return None;
    }
    let n = pts.partition_point(|p| p.0 < x);
    if n == 0 {
        return Some(first.1);
    }
    let (x0, y0) = pts[n - 1];
    let (x1, y1) = pts[n];
    Some(y0 + (x - x0) / (x1 - x0) * (y1 - y0))
}

/// Attenuation per band. Quantum channels below `o_band_upper_nm` use the
/// O-band figure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSpec {
    pub attenuation_c_band_db_per_km: f64,
    pub attenuation_o_band_db_per_km: f64,
    pub o_band_upper_nm: f64,
}

impl FiberSpec {
    pub fn attenuation_db_per_km(&self, wavelength_nm: f64) -> f64 {
        if wavelength_nm < self.o_band_upper_nm {
            self.attenuation_o_band_db_per_km
        } else {
            self.attenuation_c_band_db_per_km
        }
    }

    /// Natural-log loss coefficient in 1/km.
    pub fn loss_coefficient_per_km(&self, wavelength_nm: f64) -> f64 {
        units::loss_coefficient_per_km(self.attenuation_db_per_km(wavelength_nm))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DwdmParams {
    /// Classical receiver sensitivity R_x, dBm.
    pub receiver_sensitivity_dbm: f64,
    /// Insertion loss of the classical system, dB.
    pub insertion_loss_db: f64,
    /// Demultiplexer isolation toward the quantum port, dB.
    pub isolation_db: f64,
    /// Quantum channel filter bandwidth, Hz.
    pub filter_bandwidth_hz: f64,
}

impl DwdmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.isolation_db > 0.0) {
            return Err(Error::invalid("isolation must be positive"));
        }
        if !(self.filter_bandwidth_hz > 0.0) {
            return Err(Error::invalid("filter bandwidth must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionParams {
    /// Detection window Δt, s.
    pub window_s: f64,
    /// Detector efficiency η_D.
    pub efficiency: f64,
    /// Insertion loss in front of the detector, dB.
    pub insertion_loss_db: f64,
}

impl DetectionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_s > 0.0) {
            return Err(Error::invalid("detection window must be positive"));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::invalid("detector efficiency must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Transmission of the detection path, 10^(-0.1·IL).
    pub fn path_transmission(&self) -> f64 {
        10f64.powf(-0.1 * self.insertion_loss_db)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FwmParams {
    /// γ, 1/(W·km).
    pub nonlinear_coefficient: f64,
    /// D_c, ps/(nm·km).
    pub dispersion_ps_per_nm_km: f64,
    /// dD_c/dλ, ps/(nm²·km).
    pub dispersion_slope_ps_per_nm2_km: f64,
    pub polarization_factor: f64,
    /// Mixing products within this distance of the quantum frequency count, Hz.
    pub match_tolerance_hz: f64,
}

impl FwmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nonlinear_coefficient >= 0.0) {
            return Err(Error::invalid("nonlinear coefficient must be >= 0"));
        }
        if !(self.match_tolerance_hz >= 0.0) {
            return Err(Error::invalid("FWM matching tolerance must be >= 0"));
        }
        Ok(())
    }
}

/// Noise landing in the quantum channel on one path.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct NoiseBudget {
    pub p_raman_w: f64,
    pub p_fwm_w: f64,
    pub p_lcxt_w: f64,
    pub prob_raman: f64,
    pub prob_fwm: f64,
    pub prob_lcxt: f64,
    /// Device noise independent of the coexisting traffic, SNU.
    pub baseline_snu: f64,
    /// Baseline plus the converted channel noise, SNU.
    pub excess_noise_snu: f64,
}

impl NoiseBudget {
    pub fn total_probability(&self) -> f64 {
        self.prob_raman + self.prob_fwm + self.prob_lcxt
    }
}

/// Per-channel launch power R_x + IL in dBm.
pub fn output_power_dbm(params: &DwdmParams) -> f64 {
    params.receiver_sensitivity_dbm + params.insertion_loss_db
}

fn check_length(length_km: f64) -> Result<()> {
    if !(length_km >= 0.0) || !length_km.is_finite() {
        return Err(Error::invalid(format!(
            "fiber length must be >= 0, got {length_km} km"
        )));
    }
    Ok(())
}

/// Co-propagating Raman noise P_out·L·Σρ·Δλ.
pub fn raman_forward(
    p_out_w: f64,
    length_km: f64,
    plan: &ChannelPlan,
    table: &RamanTable,
    filter_bandwidth_nm: f64,
) -> Result<f64> {
    check_length(length_km)?;
    let rho_sum = table.plan_sum(plan)?;
    Ok(p_out_w * length_km * rho_sum * filter_bandwidth_nm)
}

/// Counter-propagating Raman noise P_out·sinh(ξL)/ξ·Σρ·Δλ.
pub fn raman_backward(
    p_out_w: f64,
    length_km: f64,
    loss_coefficient_per_km: f64,
    plan: &ChannelPlan,
    table: &RamanTable,
    filter_bandwidth_nm: f64,
) -> Result<f64> {
    check_length(length_km)?;
    if !(loss_coefficient_per_km > 0.0) {
        return Err(Error::invalid("loss coefficient must be positive"));
    }
    let rho_sum = table.plan_sum(plan)?;
    let effective = (loss_coefficient_per_km * length_km).sinh() / loss_coefficient_per_km;
    Ok(p_out_w * effective * rho_sum * filter_bandwidth_nm)
}

/// Phase mismatch Δβ (1/m) of the product f_i + f_j - f_k radiated at `lambda_m`.
pub fn fwm_phase_mismatch(f_i: f64, f_j: f64, f_k: f64, lambda_m: f64, fwm: &FwmParams) -> f64 {
    let c = PhysicalConstants::LIGHT_SPEED;
    // ps/(nm·km) -> s/m², ps/(nm²·km) -> s/m³
    let d = fwm.dispersion_ps_per_nm_km * 1e-6;
    let slope = fwm.dispersion_slope_ps_per_nm2_km * 1e3;
    let lc = lambda_m * lambda_m / c;
    let dik = (f_i - f_k).abs();
    let djk = (f_j - f_k).abs();
    2.0 * PI * lc * dik * djk * (d + slope * lc * (dik + djk))
}

/// Phase-matching efficiency η. All quantities in matching length units.
pub fn fwm_efficiency(delta_beta: f64, loss_coefficient: f64, length: f64) -> Result<f64> {
    if !(loss_coefficient > 0.0) {
        return Err(Error::invalid("loss coefficient must be positive"));
    }
    check_length(length)?;
    if length == 0.0 {
        return Ok(1.0);
    }
    let a2 = loss_coefficient * loss_coefficient;
    let decay = (-loss_coefficient * length).exp();
    let gathered = -(-loss_coefficient * length).exp_m1();
    let s = (delta_beta * length / 2.0).sin();
    Ok(a2 / (a2 + delta_beta * delta_beta) * (1.0 + 4.0 * decay * s * s / (gathered * gathered)))
}

/// Peak power of a single mixing product reaching the end of `length_km`.
pub fn fwm_product_power(
    triple: &FwmTriple,
    plan: &ChannelPlan,
    fiber: &FiberSpec,
    fwm: &FwmParams,
    length_km: f64,
) -> Result<f64> {
    check_length(length_km)?;
    if length_km == 0.0 {
        return Ok(0.0);
    }
    let f = plan.classical_hz();
    let lambda_q_nm = plan.quantum_wavelength_nm();
    let xi = fiber.loss_coefficient_per_km(lambda_q_nm);
    let delta_beta = fwm_phase_mismatch(f[triple.i], f[triple.j], f[triple.k], lambda_q_nm * 1e-9, fwm);
    let eta = fwm_efficiency(delta_beta, xi * 1e-3, length_km * 1e3)?;
    let degeneracy = f64::from(triple.degeneracy);
    let p = plan.output_power_w();
    let gathered = -(-xi * length_km).exp_m1();
    Ok(eta
        * (fwm.nonlinear_coefficient * degeneracy * fwm.polarization_factor).powi(2)
        * (-xi * length_km).exp()
        * gathered
        * gathered
        / (9.0 * xi * xi)
        * p
        * p
        * p)
}

/// Sum of all mixing products landing on the quantum channel.
pub fn fwm_total_power(
    plan: &ChannelPlan,
    fiber: &FiberSpec,
    fwm: &FwmParams,
    length_km: f64,
) -> Result<f64> {
    enumerate_fwm_triples(plan, fwm.match_tolerance_hz)
        .iter()
        .map(|t| fwm_product_power(t, plan, fiber, fwm, length_km))
        .sum()
}

/// Classical leakage through finite isolation, in watts.
pub fn lcxt_power(p_out_dbm: f64, isolation_db: f64) -> Result<f64> {
    units::dbm_to_watt(p_out_dbm - isolation_db)
}

/// Mean number of noise photons detected per window.
pub fn photon_probability(power_w: f64, quantum_wavelength_nm: f64, det: &DetectionParams) -> Result<f64> {
    if !(power_w >= 0.0) {
        return Err(Error::invalid(format!("noise power must be >= 0, got {power_w}")));
    }
    let energy = units::photon_energy(quantum_wavelength_nm)?;
    Ok(power_w / energy * det.window_s * det.efficiency * det.path_transmission())
}

/// Excess variance contributed by noise with mean photon number `prob_total`:
/// a thermal field adds 2n̄ over vacuum.
pub fn excess_noise_snu(prob_total: f64) -> f64 {
    2.0 * prob_total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_plan::build_configuration;
    use approx::assert_relative_eq;

    const P_OUT: f64 = 3.981_071_705_534_973e-6;
    const XI: f64 = 0.041_446_531_673_892_825;

    fn flat_table() -> RamanTable {
        RamanTable::flat(1e-9, (1500.0, 1600.0), (1300.0, 1600.0)).unwrap()
    }

    fn fiber() -> FiberSpec {
        FiberSpec {
            attenuation_c_band_db_per_km: 0.18,
            attenuation_o_band_db_per_km: 0.34,
            o_band_upper_nm: 1450.0,
        }
    }

    fn fwm() -> FwmParams {
        FwmParams {
            nonlinear_coefficient: 1.3,
            dispersion_ps_per_nm_km: 17.0,
            dispersion_slope_ps_per_nm2_km: 0.056,
            polarization_factor: 1.0,
            match_tolerance_hz: 1e9,
        }
    }

    fn detection() -> DetectionParams {
        DetectionParams {
            window_s: 1e-9,
            efficiency: 0.6,
            insertion_loss_db: 2.0,
        }
    }

    #[test]
    fn output_power_examples() {
        let mut p = DwdmParams {
            receiver_sensitivity_dbm: -32.0,
            insertion_loss_db: 8.0,
            isolation_db: 80.0,
            filter_bandwidth_hz: 15e9,
        };
        assert_eq!(output_power_dbm(&p), -24.0);
        p.insertion_loss_db = 0.0;
        assert_eq!(output_power_dbm(&p), -32.0);
        p.receiver_sensitivity_dbm = 0.0;
        p.insertion_loss_db = 8.0;
        assert_eq!(output_power_dbm(&p), 8.0);
    }

    #[test]
    fn table_parsing_and_interpolation() {
        let text = "# comment\nclassical_wavelength_nm,quantum_wavelength_nm,rho_per_nm_per_km\n\
                    1500, 1550, 1e-9\n1510,1550,3e-9\n1500,1560,2e-9\n1510,1560,4e-9\n";
        let t = RamanTable::from_csv_str(text).unwrap();
        assert_relative_eq!(t.rho(1505.0, 1550.0).unwrap(), 2e-9, max_relative = 1e-12);
        assert_relative_eq!(t.rho(1505.0, 1555.0).unwrap(), 2.5e-9, max_relative = 1e-12);
        assert_relative_eq!(t.rho(1510.0, 1560.0).unwrap(), 4e-9, max_relative = 1e-12);
        assert!(matches!(t.rho(1499.0, 1550.0), Err(Error::RamanCoverage { .. })));
        assert!(matches!(t.rho(1505.0, 1561.0), Err(Error::RamanCoverage { .. })));
        assert!(matches!(t.rho(1505.0, 1540.0), Err(Error::RamanCoverage { .. })));
    }

    #[test]
    fn table_rejects_bad_data() {
        let hdr = "classical_wavelength_nm,quantum_wavelength_nm,rho_per_nm_per_km\n";
        assert!(RamanTable::from_csv_str(&format!("{hdr}1500,1550,-1e-9\n")).is_err());
        assert!(RamanTable::from_csv_str(&format!("{hdr}1500,1550,abc\n")).is_err());
        assert!(RamanTable::from_csv_str(hdr).is_err());
        assert!(RamanTable::from_csv_str(&format!("{hdr}1500,1550,1e-9\n1500,1550,2e-9\n")).is_err());
    }

    #[test]
    fn bundled_table_covers_reference_plans() {
        let t = RamanTable::bundled();
        for id in 1..=4 {
            let plan = build_configuration(id, -24.0).unwrap();
            assert!(t.plan_sum(&plan).unwrap() > 0.0);
        }
    }

    #[test]
    fn raman_forward_examples() {
        let table = flat_table();
        let plan = build_configuration(1, -24.0).unwrap();
        assert_eq!(raman_forward(P_OUT, 0.0, &plan, &table, 0.12).unwrap(), 0.0);
        let v = raman_forward(P_OUT, 10.0, &plan, &table, 0.12).unwrap();
        assert_relative_eq!(v, 4.777_286_046_641_968e-14, max_relative = 1e-12);
        let plan20 = crate::channel_plan::itu_grid_plan(20, 1536.61, -24.0).unwrap();
        let v20 = raman_forward(P_OUT, 10.0, &plan20, &table, 0.12).unwrap();
        assert_relative_eq!(v20, 2.0 * v, max_relative = 1e-12);
        assert!(raman_forward(P_OUT, -1.0, &plan, &table, 0.12).is_err());
    }

    #[test]
    fn raman_missing_coverage_is_named() {
        let table = RamanTable::flat(1e-9, (1550.0, 1560.0), (1500.0, 1600.0)).unwrap();
        let plan = build_configuration(1, -24.0).unwrap();
        let err = raman_forward(P_OUT, 1.0, &plan, &table, 0.12).unwrap_err();
        assert!(err.to_string().contains("1536.610"), "{err}");
    }

    #[test]
    fn raman_backward_examples() {
        let table = flat_table();
        let plan = build_configuration(1, -24.0).unwrap();
        let v = raman_backward(P_OUT, 10.0, XI, &plan, &table, 0.12).unwrap();
        assert_relative_eq!(v, 4.915_240_525_643_665_5e-14, max_relative = 1e-12);
        // small ξL limit
        let l = 1e-4 / XI;
        let f = raman_forward(P_OUT, l, &plan, &table, 0.12).unwrap();
        let b = raman_backward(P_OUT, l, XI, &plan, &table, 0.12).unwrap();
        assert!((b / f - 1.0).abs() < 1e-8);
        for l in [0.1, 1.0, 5.0, 50.0] {
            assert!(
                raman_backward(P_OUT, l, XI, &plan, &table, 0.12).unwrap()
                    >= raman_forward(P_OUT, l, &plan, &table, 0.12).unwrap()
            );
        }
        assert!(raman_backward(P_OUT, 1.0, 0.0, &plan, &table, 0.12).is_err());
    }

    #[test]
    fn phase_mismatch() {
        let p = fwm();
        assert_eq!(fwm_phase_mismatch(193.2e12, 193.3e12, 193.2e12, 1550e-9, &p), 0.0);
        assert_eq!(fwm_phase_mismatch(193.2e12, 193.3e12, 193.3e12, 1550e-9, &p), 0.0);
        let v = fwm_phase_mismatch(193.2e12, 193.3e12, 193.1e12, 1550e-9, &p);
        assert_relative_eq!(v, 0.017_255_492_841_219_24, max_relative = 1e-12);
    }

    #[test]
    fn efficiency() {
        assert_relative_eq!(
            fwm_efficiency(0.0, 4e-5, 5000.0).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        assert_eq!(fwm_efficiency(0.3, 4e-5, 0.0).unwrap(), 1.0);
        let v = fwm_efficiency(2.0 * PI / 1000.0, 0.1, 1000.0).unwrap();
        assert_relative_eq!(v, 0.996_067_682_407_172_5, max_relative = 1e-10);
        let v = fwm_efficiency(5e-3, XI / 1000.0, 3000.0).unwrap();
        assert_relative_eq!(v, 0.015_689_168_339_065_86, max_relative = 1e-10);
        // continuity toward the L = 0 limit
        assert!((fwm_efficiency(5e-3, XI / 1000.0, 1e-3).unwrap() - 1.0).abs() < 1e-6);
        assert!(fwm_efficiency(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn product_power() {
        // a triple with f_i = f_k has Δβ = 0, so η = 1
        let plan = ChannelPlan::new(1550.0, vec![193.1e12, 193.2e12], -24.0).unwrap();
        let t = FwmTriple::new(0, 1, 0);
        assert_eq!(t.degeneracy, 6);
        let v = fwm_product_power(&t, &plan, &fiber(), &fwm(), 10.0).unwrap();
        assert_relative_eq!(v, 1.888_664_425_865_009_2e-14, max_relative = 1e-10);
        assert_eq!(fwm_product_power(&t, &plan, &fiber(), &fwm(), 0.0).unwrap(), 0.0);
        let halved = plan
            .clone()
            .with_output_power_dbm(-24.0 - 10.0 * 2f64.log10())
            .unwrap();
        let h = fwm_product_power(&t, &halved, &fiber(), &fwm(), 10.0).unwrap();
        assert_relative_eq!(h * 8.0, v, max_relative = 1e-12);
    }

    #[test]
    fn total_power() {
        for id in [2, 4] {
            let plan = build_configuration(id, -24.0).unwrap();
            assert_eq!(fwm_total_power(&plan, &fiber(), &fwm(), 5.0).unwrap(), 0.0);
        }
        let f0 = 193.1e12;
        let d = 100e9;
        let lq = units::hz_to_wavelength_nm(f0 + 3.0 * d).unwrap();
        let plan = ChannelPlan::new(lq, vec![f0 + d, f0 + 2.0 * d], -24.0).unwrap();
        let triples = enumerate_fwm_triples(&plan, 1e9);
        assert_eq!(triples.len(), 1);
        assert_eq!(
            fwm_total_power(&plan, &fiber(), &fwm(), 5.0).unwrap(),
            fwm_product_power(&triples[0], &plan, &fiber(), &fwm(), 5.0).unwrap()
        );
    }

    #[test]
    fn total_power_matches_brute_force_at_forty_channels() {
        let plan = build_configuration(3, -24.0).unwrap();
        let f = plan.classical_hz();
        let fq = plan.quantum_hz();
        let mut brute = 0.0;
        let mut count = 0;
        for i in 0..f.len() {
            for j in i..f.len() {
                for k in 0..f.len() {
                    if (f[i] + f[j] - f[k] - fq).abs() <= 1e9 {
                        brute += fwm_product_power(&FwmTriple::new(i, j, k), &plan, &fiber(), &fwm(), 4.0)
                            .unwrap();
                        count += 1;
                    }
                }
            }
        }
        assert!(count > 0);
        let fast = fwm_total_power(&plan, &fiber(), &fwm(), 4.0).unwrap();
        assert_relative_eq!(fast, brute, max_relative = 1e-12);
    }

    #[test]
    fn crosstalk() {
        assert_relative_eq!(
            lcxt_power(-24.0, 30.0).unwrap(),
            3.981_071_705_534_969e-9,
            max_relative = 1e-12
        );
        assert!(lcxt_power(-24.0, 200.0).unwrap() < 1e-25);
        assert_relative_eq!(lcxt_power(-24.0, 0.0).unwrap(), P_OUT, max_relative = 1e-12);
    }

    #[test]
    fn photon_probability_examples() {
        let det = detection();
        assert_eq!(photon_probability(0.0, 1536.61, &det).unwrap(), 0.0);
        let p = photon_probability(4.777e-14, 1536.61, &det).unwrap();
        assert_relative_eq!(p, 1.398_921_724_170_698_7e-4, max_relative = 1e-10);
        let wide = DetectionParams {
            window_s: 2e-9,
            ..det
        };
        assert_relative_eq!(
            photon_probability(4.777e-14, 1536.61, &wide).unwrap(),
            2.0 * p,
            max_relative = 1e-12
        );
        assert!(photon_probability(-1.0, 1536.61, &det).is_err());
    }

    #[test]
    fn snu_conversion() {
        assert_eq!(excess_noise_snu(0.0), 0.0);
        assert_relative_eq!(excess_noise_snu(1e-4), 2e-4);
        assert_relative_eq!(
            excess_noise_snu(3e-4) + excess_noise_snu(5e-4),
            excess_noise_snu(8e-4)
        );
    }

    proptest::proptest! {
        #[test]
        fn backward_forward_ratio(xl in 1e-6f64..5.0) {
            let table = flat_table();
            let plan = build_configuration(1, -24.0).unwrap();
            let l = xl / XI;
            let f = raman_forward(P_OUT, l, &plan, &table, 0.12).unwrap();
            let b = raman_backward(P_OUT, l, XI, &plan, &table, 0.12).unwrap();
            proptest::prop_assert!((b / f - xl.sinh() / xl).abs() <= 1e-10 * xl.sinh() / xl);
        }

        #[test]
        fn probability_linear(p in 0.0f64..1e-9, w in 1e-12f64..1e-6, e in 0.01f64..1.0) {
            let det = DetectionParams { window_s: w, efficiency: e, insertion_loss_db: 1.0 };
            let base = photon_probability(p, 1550.0, &det).unwrap();
            let dbl = photon_probability(2.0 * p, 1550.0, &det).unwrap();
            proptest::prop_assert!((dbl - 2.0 * base).abs() <= 1e-12 * dbl.abs().max(1e-300));
        }

        #[test]
        fn noise_monotone_in_power(dbm in -40.0f64..0.0, step in 0.01f64..10.0, l in 0.1f64..20.0) {
            let table = flat_table();
            let lo = build_configuration(3, dbm).unwrap();
            let hi = build_configuration(3, dbm + step).unwrap();
            let pw = |p: &ChannelPlan| p.output_power_w();
            proptest::prop_assert!(raman_forward(pw(&hi), l, &hi, &table, 0.12).unwrap() >= raman_forward(pw(&lo), l, &lo, &table, 0.12).unwrap());
            proptest::prop_assert!(fwm_total_power(&hi, &fiber(), &fwm(), l).unwrap() >= fwm_total_power(&lo, &fiber(), &fwm(), l).unwrap());
            proptest::prop_assert!(lcxt_power(dbm + step, 30.0).unwrap() >= lcxt_power(dbm, 30.0).unwrap());
        }
    }
}
