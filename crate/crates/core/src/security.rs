//! Gaussian security analysis of the MDI link reduced to an equivalent
//! one-way channel under collective (entangling cloner) attacks.
//!
//! Bob's displaced mode plays the role of the receiver; both announced
//! quadratures are used, so mutual information and the conditional state
//! follow the heterodyne formulas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physicality slack on symplectic eigenvalues.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolParams {
    /// Alice's total quadrature variance V_A (SNU, includes vacuum).
    pub variance_alice: f64,
    /// Bob's total quadrature variance V_B (SNU).
    pub variance_bob: f64,
    /// Reconciliation efficiency β.
    pub reconciliation_efficiency: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams {
            variance_alice: 40.0,
            variance_bob: 40.0,
            reconciliation_efficiency: 1.0,
        }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.variance_alice >= 1.0) || !(self.variance_bob >= 1.0) {
            return Err(Error::invalid("modulation variances must be >= 1 SNU"));
        }
        if !(0.0..=1.0).contains(&self.reconciliation_efficiency) {
            return Err(Error::invalid("reconciliation efficiency must lie in [0, 1]"));
        }
        Ok(())
    }
}

fn check_transmittance(eta: f64, name: &str) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must lie in (0, 1], got {eta}")))
    }
}

/// Displacement gain that minimises the equivalent excess noise.
pub fn optimal_gain(eta_b: f64, v_b: f64) -> Result<f64> {
    check_transmittance(eta_b, "eta_b")?;
    if !(v_b >= 1.0) {
        return Err(Error::invalid(format!("V_B must be >= 1, got {v_b}")));
    }
    Ok((2.0 / eta_b).sqrt() * ((v_b - 1.0) / (v_b + 1.0)).sqrt())
}

/// Equivalent excess noise at the optimal gain:
/// ξ_A + [η_B(ξ_B - 2) + 2]/η_A.
pub fn equivalent_excess_noise(eta_a: f64, eta_b: f64, xi_a: f64, xi_b: f64) -> Result<f64> {
    check_transmittance(eta_a, "eta_a")?;
    check_transmittance(eta_b, "eta_b")?;
    Ok(xi_a + (eta_b * (xi_b - 2.0) + 2.0) / eta_a)
}

/// Equivalent excess noise for an arbitrary gain `g`. Reduces to
/// [`equivalent_excess_noise`] at `g = optimal_gain(eta_b, v_b)`.
pub fn general_excess_noise(eta_a: f64, eta_b: f64, xi_a: f64, xi_b: f64, g: f64, v_b: f64) -> Result<f64> {
    check_transmittance(eta_a, "eta_a")?;
    check_transmittance(eta_b, "eta_b")?;
    if !(g > 0.0) {
        return Err(Error::invalid("gain must be positive"));
    }
    let big_xi_a = (1.0 - eta_a) / eta_a + xi_a;
    let big_xi_b = (1.0 - eta_b) / eta_b + xi_b;
    let mismatch = 2f64.sqrt() / g * (v_b - 1.0).sqrt() - eta_b.sqrt() * (v_b + 1.0).sqrt();
    Ok(1.0 + (eta_b * (big_xi_b - 1.0) + eta_a * big_xi_a) / eta_a + mismatch * mismatch / eta_a)
}

/// The MDI link seen as a single lossy, noisy channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalentChannel {
    pub eta_a: f64,
    pub eta_b: f64,
    pub xi_a: f64,
    pub xi_b: f64,
    pub gain_g: f64,
    /// T = η_A·g²/2.
    pub t_equiv: f64,
    pub xi_prime: f64,
}

impl EquivalentChannel {
    pub fn new(params: &ProtocolParams, eta_a: f64, eta_b: f64, xi_a: f64, xi_b: f64) -> Result<Self> {
        if !(xi_a >= 0.0) || !(xi_b >= 0.0) {
            return Err(Error::invalid("excess noise must be >= 0"));
        }
        let gain_g = optimal_gain(eta_b, params.variance_bob)?;
        let xi_prime = equivalent_excess_noise(eta_a, eta_b, xi_a, xi_b)?;
        Ok(EquivalentChannel {
            eta_a,
            eta_b,
            xi_a,
            xi_b,
            gain_g,
            t_equiv: eta_a * gain_g * gain_g / 2.0,
            xi_prime,
        })
    }
}

/// Two-mode covariance matrix [[a·I, c·σz], [c·σz, b·I]].
///
/// The correlation is stored squared; every quantity derived from the
/// matrix depends on c only through c².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceState {
    pub a: f64,
    pub b: f64,
    pub c_squared: f64,
}

impl CovarianceState {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        CovarianceState {
            a,
            b,
            c_squared: c * c,
        }
    }

    pub fn from_correlation_squared(a: f64, b: f64, c_squared: f64) -> Self {
        CovarianceState { a, b, c_squared }
    }

    pub fn c(&self) -> f64 {
        self.c_squared.sqrt()
    }

    /// The purification of a thermal state of variance `v`.
    pub fn two_mode_squeezed(v: f64) -> Self {
        Self::from_correlation_squared(v, v, v * v - 1.0)
    }

    pub fn is_physical(&self) -> bool {
        self.a >= 1.0 - PHYSICALITY_TOLERANCE
            && self.b >= 1.0 - PHYSICALITY_TOLERANCE
            && symplectic_eigenvalues(self).is_ok_and(|(_, nu2)| nu2 >= 1.0 - PHYSICALITY_TOLERANCE)
    }
}

pub fn build_covariance(params: &ProtocolParams, channel: &EquivalentChannel) -> Result<CovarianceState> {
    let v = params.variance_alice;
    let t = channel.t_equiv;
    let state = CovarianceState::from_correlation_squared(
        v,
        t * (v - 1.0) + 1.0 + t * channel.xi_prime,
        t * (v * v - 1.0),
    );
    if !state.is_physical() {
        return Err(Error::numerical(format!(
            "unphysical covariance state (a={}, b={}, c²={}) for T={} ξ'={}",
            state.a, state.b, state.c_squared, t, channel.xi_prime
        )));
    }
    Ok(state)
}

/// Symplectic spectrum (ν1 ≥ ν2) of the two-mode state.
pub fn symplectic_eigenvalues(state: &CovarianceState) -> Result<(f64, f64)> {
    let CovarianceState { a, b, c_squared } = *state;
    let delta = a * a + b * b - 2.0 * c_squared;
    let det = a * b - c_squared;
    let mut disc = delta * delta - 4.0 * det * det;
    if disc < 0.0 {
        if disc < -1e-12 * (delta * delta).max(1.0) {
            return Err(Error::numerical(format!(
                "negative symplectic discriminant {disc}"
            )));
        }
        disc = 0.0;
    }
    let nu1 = ((delta + disc.sqrt()) / 2.0).sqrt();
    if !(nu1 > 0.0) || !(det > 0.0) {
        return Err(Error::numerical(format!("degenerate covariance state {state:?}")));
    }
    // ν1·ν2 = det avoids cancellation in (Δ - √disc)
    Ok((nu1, det / nu1))
}

/// Symplectic eigenvalue of Alice's mode conditioned on Bob's heterodyne outcome.
pub fn conditional_eigenvalue(state: &CovarianceState) -> f64 {
    state.a - state.c_squared / (state.b + 1.0)
}

/// Entropy function G(x) = (x+1)log2(x+1) - x·log2(x), in bits.
pub fn g_function(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (x + 1.0) * (x + 1.0).log2() - x * x.log2()
}

pub fn mutual_information(state: &CovarianceState) -> f64 {
    let joint = (state.a + 1.0) * (state.b + 1.0);
    (joint / (joint - state.c_squared)).log2()
}

pub fn holevo_bound(state: &CovarianceState) -> Result<f64> {
    let (nu1, nu2) = symplectic_eigenvalues(state)?;
    let nu3 = conditional_eigenvalue(state);
    Ok(g_function((nu1 - 1.0) / 2.0) + g_function((nu2 - 1.0) / 2.0) - g_function((nu3 - 1.0) / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateBreakdown {
    pub mutual_information: f64,
    pub holevo_bound: f64,
    /// β·I - χ before clamping.
    pub raw_key_fraction: f64,
    /// max(0, raw), bits per channel use.
    pub key_fraction: f64,
    pub symplectic_eigenvalues: [f64; 3],
    pub channel: EquivalentChannel,
}

/// Devetak-Winter key fraction for the equivalent channel.
pub fn key_fraction(params: &ProtocolParams, channel: &EquivalentChannel) -> Result<RateBreakdown> {
    params.validate()?;
    let state = build_covariance(params, channel)?;
    let (nu1, nu2) = symplectic_eigenvalues(&state)?;
    let nu3 = conditional_eigenvalue(&state);
    let info = mutual_information(&state);
    let chi = holevo_bound(&state)?;
    let raw = params.reconciliation_efficiency * info - chi;
    if !raw.is_finite() {
        return Err(Error::numerical("non-finite key fraction"));
    }
    Ok(RateBreakdown {
        mutual_information: info,
        holevo_bound: chi,
        raw_key_fraction: raw,
        key_fraction: raw.max(0.0),
        symplectic_eigenvalues: [nu1, nu2, nu3],
        channel: *channel,
    })
}
