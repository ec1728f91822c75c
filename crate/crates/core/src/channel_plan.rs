//! DWDM channel allocations and four-wave-mixing triple enumeration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units;

/// First slot of the default 100 GHz grid.
pub const GRID_ANCHOR_HZ: f64 = 193.1e12;
pub const GRID_SPACING_HZ: f64 = 100e9;
/// Default tolerance for a mixing product to count as landing on the quantum channel.
pub const DEFAULT_MATCH_TOLERANCE_HZ: f64 = 1e9;

/// Quantum channel plus the classical channels sharing the fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelPlan {
    quantum_wavelength_nm: f64,
    classical_hz: Vec<f64>,
    output_power_dbm: f64,
}

impl ChannelPlan {
    pub fn new(quantum_wavelength_nm: f64, classical_hz: Vec<f64>, output_power_dbm: f64) -> Result<Self> {
        let fq = units::wavelength_nm_to_hz(quantum_wavelength_nm)?;
        if !output_power_dbm.is_finite() {
            return Err(Error::invalid("per-channel output power must be finite"));
        }
        if classical_hz.is_empty() {
            return Err(Error::invalid(
                "a channel plan needs at least one classical channel",
            ));
        }
        for (n, &f) in classical_hz.iter().enumerate() {
            if !(f > 0.0) || !f.is_finite() {
                return Err(Error::invalid(format!(
                    "classical channel {n} has non-positive frequency {f}"
                )));
            }
            if f == fq {
                return Err(Error::invalid(format!(
                    "classical channel {n} coincides with the quantum channel"
                )));
            }
            if classical_hz[..n].contains(&f) {
                return Err(Error::invalid(format!("duplicate classical frequency {f} Hz")));
            }
        }
        Ok(ChannelPlan {
            quantum_wavelength_nm,
            classical_hz,
            output_power_dbm,
        })
    }

    pub fn quantum_wavelength_nm(&self) -> f64 {
        self.quantum_wavelength_nm
    }

    pub fn quantum_hz(&self) -> f64 {
        // validated in `new`
        units::wavelength_nm_to_hz(self.quantum_wavelength_nm).unwrap()
    }

    pub fn classical_hz(&self) -> &[f64] {
        &self.classical_hz
    }

    pub fn classical_wavelengths_nm(&self) -> impl Iterator<Item = f64> + '_ {
        self.classical_hz
            .iter()
            .map(|&f| units::hz_to_wavelength_nm(f).unwrap())
    }

    pub fn channel_count(&self) -> usize {
        self.classical_hz.len()
    }

    pub fn output_power_dbm(&self) -> f64 {
        self.output_power_dbm
    }

    /// Per-channel launch power in watts.
    pub fn output_power_w(&self) -> f64 {
        units::dbm_to_watt(self.output_power_dbm).unwrap()
    }

    pub fn with_output_power_dbm(mut self, dbm: f64) -> Result<Self> {
        if !dbm.is_finite() {
            return Err(Error::invalid("per-channel output power must be finite"));
        }
        self.output_power_dbm = dbm;
        Ok(self)
    }
}

/// `count` contiguous 100 GHz slots upward from 193.1 THz, skipping the slot
/// occupied by the quantum channel.
pub fn itu_grid_plan(count: usize, quantum_wavelength_nm: f64, output_power_dbm: f64) -> Result<ChannelPlan> {
    let fq = units::wavelength_nm_to_hz(quantum_wavelength_nm)?;
    let mut freqs = Vec::with_capacity(count);
    let mut slot = 0u32;
    while freqs.len() < count {
        let f = GRID_ANCHOR_HZ + f64::from(slot) * GRID_SPACING_HZ;
        slot += 1;
        if (f - fq).abs() < GRID_SPACING_HZ / 2.0 {
            continue;
        }
        freqs.push(f);
    }
    ChannelPlan::new(quantum_wavelength_nm, freqs, output_power_dbm)
}

/// The four reference configurations: (classical channel count, quantum wavelength in nm).
pub const CONFIGURATIONS: [(usize, f64); 4] = [(10, 1536.61), (10, 1310.0), (40, 1537.40), (40, 1310.0)];

/// Builds reference configuration `id` (1 to 4).
pub fn build_configuration(id: u32, output_power_dbm: f64) -> Result<ChannelPlan> {
    let (count, lambda_q) = usize::try_from(id)
        .ok()
        .and_then(|i| i.checked_sub(1))
        .and_then(|i| CONFIGURATIONS.get(i))
        .copied()
        .ok_or_else(|| Error::Config(format!("unknown configuration id {id} (expected 1..=4)")))?;
    itu_grid_plan(count, lambda_q, output_power_dbm)
}

/// Indices of three classical channels whose product f_i + f_j - f_k lands
/// on the quantum channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FwmTriple {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    /// 3 for degenerate (i = j) products, 6 otherwise.
    pub degeneracy: u8,
}

impl FwmTriple {
    pub fn new(i: usize, j: usize, k: usize) -> Self {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        FwmTriple {
            i,
            j,
            k,
            degeneracy: if i == j { 3 } else { 6 },
        }
    }
}

/// All triples with i <= j (k free) satisfying |f_i + f_j - f_k - f_q| <= tolerance,
/// sorted lexicographically by (i, j, k).
pub fn enumerate_fwm_triples(plan: &ChannelPlan, tolerance_hz: f64) -> Vec<FwmTriple> {
    let fq = plan.quantum_hz();
    let f = plan.classical_hz();
    let mut by_freq: Vec<usize> = (0..f.len()).collect();
    by_freq.sort_by(|&a, &b| f[a].total_cmp(&f[b]));
    let sorted: Vec<f64> = by_freq.iter().map(|&n| f[n]).collect();

    let mut out = Vec::new();
    for i in 0..f.len() {
        for j in i..f.len() {
            let target = f[i] + f[j] - fq;
            let lo = sorted.partition_point(|&x| x < target - tolerance_hz - 1.0);
            let mut ks: Vec<usize> = sorted[lo..]
                .iter()
                .zip(&by_freq[lo..])
                .take_while(|(&x, _)| x <= target + tolerance_hz + 1.0)
                .filter(|(&x, _)| (f[i] + f[j] - x - fq).abs() <= tolerance_hz)
                .map(|(_, &k)| k)
                .collect();
            ks.sort_unstable();
            out.extend(ks.into_iter().map(|k| FwmTriple::new(i, j, k)));
        }
    }
    out
}
