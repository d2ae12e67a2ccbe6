//! Gaussian states in shot-noise units.
//!
//! Quadratures are ordered `(x₁, p₁, x₂, p₂, …)`, the vacuum is the identity
//! and the symplectic form is `Ω = ⊕ [[0, 1], [−1, 0]]`.

use nalgebra::{Cholesky, DMatrix, SVD};

use crate::error::{Error, Result};

const EIGEN_MAX_ITER: usize = 10_000;

/// Symplectic eigenvalues below `1 − PHYSICAL_TOL` mark an unphysical state.
pub const PHYSICAL_TOL: f64 = 1e-9;
/// Rank threshold of the generalised inverse used for homodyne conditioning.
pub const PINV_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(DMatrix<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    P,
}

impl CovarianceMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n == 0 || !n.is_multiple_of(2) || m.ncols() != n {
            return Err(Error::Unphysical(format!(
                "covariance matrix must be 2n×2n, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::Unphysical(format!(
                        "covariance matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn vacuum(modes: usize) -> Self {
        Self(DMatrix::identity(2 * modes, 2 * modes))
    }

    pub fn thermal(v: f64) -> Result<Self> {
        if !(v >= 1.0) {
            return Err(Error::param("V", v, "thermal variance must be at least 1"));
        }
        Ok(Self(DMatrix::from_diagonal_element(2, 2, v)))
    }

    pub fn modes(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// 2×2 block between modes `i` and `j`.
    pub fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        self.0.view((2 * i, 2 * j), (2, 2)).into_owned()
    }

    /// Marginal state of the listed modes, in the given order.
    pub fn reduce(&self, modes: &[usize]) -> Self {
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        Self(DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.0[(idx[r], idx[c])]))
    }

    /// Appends `other` as uncorrelated modes.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (n, m) = (self.0.nrows(), other.0.nrows());
        let mut out = DMatrix::zeros(n + m, n + m);
        out.view_mut((0, 0), (n, n)).copy_from(&self.0);
        out.view_mut((n, n), (m, m)).copy_from(&other.0);
        Self(out)
    }

    fn transform(&self, s: &DMatrix<f64>) -> Self {
        let m = s * &self.0 * s.transpose();
        Self(symmetrize(m))
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes() {
            return Err(Error::param("mode_index", mode as f64, "mode index out of range"));
        }
        Ok(())
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

pub fn omega(modes: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        o[(2 * k, 2 * k + 1)] = 1.0;
        o[(2 * k + 1, 2 * k)] = -1.0;
    }
    o
}

/// Two-mode squeezed vacuum with local variance `v`.
pub fn tmsv(v: f64) -> Result<CovarianceMatrix> {
    if !(v >= 1.0) || !v.is_finite() {
        return Err(Error::param("V", v, "TMSV variance must be at least 1"));
    }
    let c = ((v - 1.0) * (v + 1.0)).sqrt();
    let mut m = DMatrix::from_diagonal_element(4, 4, v);
    m[(0, 2)] = c;
    m[(2, 0)] = c;
    m[(1, 3)] = -c;
    m[(3, 1)] = -c;
    Ok(CovarianceMatrix(m))
}

fn check_gain_eta(gain: f64, eta: f64) -> Result<()> {
    if !(gain >= 1.0) || !gain.is_finite() {
        return Err(Error::param("G", gain, "amplifier gain must be at least 1"));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::param("eta", eta, "efficiency must lie in (0, 1]"));
    }
    Ok(())
}

/// Phase-insensitive amplifier of gain `gain` followed by loss `eta` on one mode:
/// `σ_mm → ηG σ_mm + (η(G−1) + 1 − η) I`, cross blocks scaled by `√(ηG)`.
pub fn apply_channel(cm: &CovarianceMatrix, mode: usize, gain: f64, eta: f64) -> Result<CovarianceMatrix> {
    check_gain_eta(gain, eta)?;
    cm.check_mode(mode)?;
    let mut m = cm.0.clone();
    let s = (eta * gain).sqrt();
    let noise = eta * (gain - 1.0) + 1.0 - eta;
    let (r0, r1) = (2 * mode, 2 * mode + 2);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let in_i = (r0..r1).contains(&i);
            let in_j = (r0..r1).contains(&j);
            m[(i, j)] *= match (in_i, in_j) {
                (true, true) => eta * gain,
                (true, false) | (false, true) => s,
                (false, false) => 1.0,
            };
        }
    }
    for i in r0..r1 {
        m[(i, i)] += noise;
    }
    Ok(CovarianceMatrix(m))
}

/// Two-mode-squeezing dilation of the amplifier: appends a vacuum idler and
/// returns the joint state. The idler is the last mode.
pub fn amplifier_dilation(cm: &CovarianceMatrix, mode: usize, gain: f64) -> Result<CovarianceMatrix> {
    check_gain_eta(gain, 1.0)?;
    cm.check_mode(mode)?;
    let joint = cm.direct_sum(&CovarianceMatrix::vacuum(1));
    let n = joint.0.nrows();
    let idler = n / 2 - 1;
    let (c, s) = (gain.sqrt(), (gain - 1.0).sqrt());
    let mut sym = DMatrix::identity(n, n);
    for (q, z) in [1.0, -1.0].into_iter().enumerate() {
        let (a, b) = (2 * mode + q, 2 * idler + q);
        sym[(a, a)] = c;
        sym[(b, b)] = c;
        sym[(a, b)] = s * z;
        sym[(b, a)] = s * z;
    }
    Ok(joint.transform(&sym))
}

/// Beamsplitter dilation of loss `eta`: appends the vacuum environment mode
/// and returns the joint state with the environment last.
pub fn loss_dilation(cm: &CovarianceMatrix, mode: usize, eta: f64) -> Result<CovarianceMatrix> {
    check_gain_eta(1.0, eta)?;
    cm.check_mode(mode)?;
    let joint = cm.direct_sum(&CovarianceMatrix::vacuum(1));
    let n = joint.0.nrows();
    let env = n / 2 - 1;
    let (t, r) = (eta.sqrt(), (1.0 - eta).sqrt());
    let mut sym = DMatrix::identity(n, n);
    for q in 0..2 {
        let (a, b) = (2 * mode + q, 2 * env + q);
        sym[(a, a)] = t;
        sym[(b, b)] = t;
        sym[(a, b)] = r;
        sym[(b, a)] = -r;
    }
    Ok(joint.transform(&sym))
}

/// Symplectic spectrum, one value per mode, sorted descending.
///
/// With `γ = L Lᵀ`, the matrix `Lᵀ Ω L` is real antisymmetric and similar to
/// `Ωγ`, so its singular values are the `ν_k`, each appearing twice.
pub fn symplectic_eigenvalues(cm: &CovarianceMatrix) -> Result<Vec<f64>> {
    let n = cm.modes();
    let scale = cm.0.amax().max(1.0);
    // strongly squeezed pure states can lose definiteness to rounding alone
    let shift = 64.0 * f64::EPSILON * scale;
    let l = Cholesky::new(cm.0.clone())
        .or_else(|| Cholesky::new(&cm.0 + DMatrix::from_diagonal_element(2 * n, 2 * n, shift)))
        .ok_or_else(|| Error::Unphysical("covariance matrix is not positive definite".into()))?
        .unpack();
    let a = l.transpose() * omega(n) * &l;
    let svd = SVD::try_new(a, false, false, f64::EPSILON, EIGEN_MAX_ITER).ok_or_else(not_converged)?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let spectrum: Vec<f64> = sv.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    if let Some(&min) = spectrum.last() {
        if min < 1.0 - physical_tolerance(scale) {
            return Err(Error::Unphysical(format!(
                "symplectic eigenvalue {min} violates the uncertainty principle"
            )));
        }
    }
    Ok(spectrum)
}

/// `1 − ν` allowed before a state counts as unphysical. Rounding in the entries
/// moves `ν` by up to `ε‖γ‖²`, which dominates for strongly squeezed states.
pub fn physical_tolerance(norm: f64) -> f64 {
    PHYSICAL_TOL + 64.0 * f64::EPSILON * norm * norm
}

fn not_converged() -> Error {
    Error::NonConvergence {
        context: "symplectic eigendecomposition".into(),
        estimate: f64::NAN,
    }
}

/// `g(x) = (x+1) log₂(x+1) − x log₂ x`, the entropy of a thermal state with mean photon number `x`.
pub fn entropy_g(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (x + 1.0) * (x + 1.0).log2() - x * x.log2()
}

/// Von Neumann entropy in bits.
///
/// Modes with `ν − 1` below the rounding floor `64 ε ‖γ‖²` are counted as pure;
/// `g` has infinite slope at zero, so that noise would otherwise be amplified.
pub fn von_neumann_entropy(cm: &CovarianceMatrix) -> Result<f64> {
    let scale = cm.0.amax().max(1.0);
    let floor = 64.0 * f64::EPSILON * scale * scale;
    Ok(symplectic_eigenvalues(cm)?
        .into_iter()
        .map(|nu| {
            if nu - 1.0 <= floor {
                0.0
            } else {
                entropy_g((nu - 1.0) / 2.0)
            }
        })
        .sum())
}

/// State of the remaining modes after homodyne detection of `quadrature` on `mode`:
/// `σ_A − σ_C (Π σ_B Π)⁺ σ_Cᵀ`.
pub fn homodyne_condition(cm: &CovarianceMatrix, mode: usize, quadrature: Quadrature) -> Result<CovarianceMatrix> {
    cm.check_mode(mode)?;
    if cm.modes() < 2 {
        return Err(Error::param(
            "mode_index",
            mode as f64,
            "conditioning needs another mode",
        ));
    }
    let rest: Vec<usize> = (0..cm.modes()).filter(|&m| m != mode).collect();
    let a = cm.reduce(&rest).0;
    let q = match quadrature {
        Quadrature::X => 2 * mode,
        Quadrature::P => 2 * mode + 1,
    };
    let var = cm.0[(q, q)];
    if var.abs() <= PINV_TOL {
        return Ok(CovarianceMatrix(a));
    }
    let idx: Vec<usize> = rest.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    let c = DMatrix::from_fn(idx.len(), 1, |r, _| cm.0[(idx[r], q)]);
    let cond = a - &c * c.transpose() / var;
    Ok(CovarianceMatrix(symmetrize(cond)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Eigenvalues of `Ωγ` from a general real Schur decomposition; they come
    /// as `±iν`.
    fn schur_spectrum(cm: &CovarianceMatrix) -> Vec<f64> {
        let m = omega(cm.modes()) * cm.matrix();
        let mut nu: Vec<f64> = nalgebra::Schur::try_new(m, f64::EPSILON, 100_000)
            .expect("Schur iteration")
            .complex_eigenvalues()
            .iter()
            .filter(|z| z.im > 0.0)
            .map(|z| z.im)
            .collect();
        nu.sort_by(|a, b| b.total_cmp(a));
        nu
    }

    /// Two-mode spectrum from the invariants `Δ = det A + det B + 2 det C` and `det γ`.
    fn two_mode_spectrum(cm: &CovarianceMatrix) -> [f64; 2] {
        let det = |m: DMatrix<f64>| m.determinant();
        let delta = det(cm.block(0, 0)) + det(cm.block(1, 1)) + 2.0 * det(cm.block(0, 1));
        let d = cm.matrix().determinant();
        let root = (delta * delta - 4.0 * d).max(0.0).sqrt();
        let hi = (0.5 * (delta + root)).sqrt();
        [hi, d.sqrt() / hi]
    }

    #[test]
    fn tmsv_examples() {
        assert_eq!(tmsv(1.0).unwrap().matrix(), &DMatrix::<f64>::identity(4, 4));
        let s = tmsv(2.0).unwrap();
        assert!((s.matrix().determinant() - 1.0).abs() < 1e-12);
        for nu in symplectic_eigenvalues(&s).unwrap() {
            assert!((nu - 1.0).abs() < 1e-10);
        }
        assert!(tmsv(0.5).is_err());
    }

    #[test]
    fn channel_examples() {
        let vac = CovarianceMatrix::vacuum(1);
        let out = apply_channel(&vac, 0, 2.0, 1.0).unwrap();
        assert!((out.matrix()[(0, 0)] - 3.0).abs() < 1e-15);

        let s = tmsv(3.0).unwrap();
        let same = apply_channel(&s, 1, 1.0, 1.0).unwrap();
        assert_eq!(same, s);

        let out = apply_channel(&s, 1, 2.0, 1.0).unwrap();
        assert!((out.matrix()[(2, 2)] - 7.0).abs() < 1e-12);
        assert!((out.matrix()[(0, 2)] - 2f64.sqrt() * 8f64.sqrt()).abs() < 1e-12);
        assert!(apply_channel(&s, 1, 0.9, 1.0).is_err());
        assert!(apply_channel(&s, 1, 2.0, 0.0).is_err());
    }

    #[test]
    fn amplified_tmsv_spectrum_matches_schur() {
        let out = apply_channel(&tmsv(3.0).unwrap(), 1, 2.0, 1.0).unwrap();
        let ours = symplectic_eigenvalues(&out).unwrap();
        let oracle = schur_spectrum(&out);
        assert_eq!(ours.len(), 2);
        let closed = two_mode_spectrum(&out);
        assert!((ours[0] - closed[0]).abs() < 1e-10 && (ours[1] - closed[1]).abs() < 1e-10);
        for (a, b) in ours.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10, "{ours:?} vs {oracle:?}");
        }
    }

    #[test]
    fn thermal_spectrum() {
        let t = CovarianceMatrix::thermal(4.5).unwrap();
        assert!((symplectic_eigenvalues(&t).unwrap()[0] - 4.5).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_g(0.0), 0.0);
        assert!((entropy_g(1.0) - 2.0).abs() < 1e-15);
        assert!((entropy_g(0.5) - (1.5 * 1.5f64.log2() + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn dilations_reproduce_the_channel() {
        let s = tmsv(5.0).unwrap();
        let amp = amplifier_dilation(&s, 1, 1.7).unwrap();
        let joint = loss_dilation(&amp, 1, 0.6).unwrap();
        let direct = apply_channel(&s, 1, 1.7, 0.6).unwrap();
        let ab = joint.reduce(&[0, 1]);
        assert!((ab.matrix() - direct.matrix()).amax() < 1e-12);
        // purification stays pure
        assert!(von_neumann_entropy(&joint).unwrap() < 1e-10);
    }

    #[test]
    fn homodyne_on_tmsv_half_purifies() {
        // conditioning one half of a pure two-mode state leaves a pure state
        let s = tmsv(7.0).unwrap();
        let c = homodyne_condition(&s, 1, Quadrature::X).unwrap();
        assert!((c.matrix()[(0, 0)] - 1.0 / 7.0).abs() < 1e-12);
        assert!((c.matrix()[(1, 1)] - 7.0).abs() < 1e-12);
        assert!(von_neumann_entropy(&c).unwrap() < 1e-10);
    }

    #[test]
    fn unphysical_state_is_reported() {
        let m = DMatrix::from_diagonal_element(2, 2, 0.5);
        let cm = CovarianceMatrix::new(m).unwrap();
        assert!(matches!(symplectic_eigenvalues(&cm), Err(Error::Unphysical(_))));
    }

    proptest! {
        #[test]
        fn channel_preserves_physicality(v in 1.0f64..1e3, g in 1.0f64..50.0, eta in 1e-3f64..=1.0) {
            let out = apply_channel(&tmsv(v).unwrap(), 1, g, eta).unwrap();
            let nu = symplectic_eigenvalues(&out).unwrap();
            prop_assert!(nu.iter().all(|&x| x >= 1.0 - PHYSICAL_TOL));
            let oracle = two_mode_spectrum(&out);
            for (a, b) in nu.iter().zip(&oracle) {
                prop_assert!((a - b).abs() <= 1e-7 * b.max(1.0), "{nu:?} vs {oracle:?}");
            }
        }

        #[test]
        fn pure_states_have_zero_entropy(v in 1.0f64..1e3, g in 1.0f64..20.0, eta in 1e-3f64..=1.0) {
            let s = tmsv(v).unwrap();
            prop_assert!(von_neumann_entropy(&s).unwrap() < 1e-10);
            let full = loss_dilation(&amplifier_dilation(&s, 1, g).unwrap(), 1, eta).unwrap();
            prop_assert!(von_neumann_entropy(&full).unwrap() < 1e-10);
        }
    }
}
