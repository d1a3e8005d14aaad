//! Symplectic spectra, single-oscillator reductions, Gaussian entropy and
//! the Wigner function of a two-mode Gaussian state.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};

use crate::dynamics::{symplectic_form, GaussianState, UNCERTAINTY_TOL};
use crate::error::{Error, Result};

/// Distance from ½ below which the (d − ½)·ln(d − ½) term is taken as 0.
const PURE_STATE_EPS: f64 = 1e-12;

/// Symplectic eigenvalues ordered `largest >= smallest`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticSpectrum {
    pub largest: f64,
    pub smallest: f64,
}

impl SymplecticSpectrum {
    pub fn as_array(&self) -> [f64; 2] {
        [self.largest, self.smallest]
    }

    pub fn satisfies_uncertainty(&self) -> bool {
        self.smallest >= 0.5 - UNCERTAINTY_TOL
    }
}

/// Moduli of the eigenvalues of iΛC.
///
/// Solved as the real eigenproblem of Λ·C, whose eigenvalues are ±i·e; each
/// modulus appears twice and the two copies are averaged.
pub fn symplectic_spectrum(state: &GaussianState) -> Result<SymplecticSpectrum> {
    spectrum_of(&state.cov)
}

pub(crate) fn spectrum_of(cov: &Matrix4<f64>) -> Result<SymplecticSpectrum> {
    let m = symplectic_form() * cov;
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("Schur decomposition of Λ·C did not converge".into()))?;
    let mut moduli: Vec<f64> = schur.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    Ok(SymplecticSpectrum {
        largest: 0.5 * (moduli[0] + moduli[1]),
        smallest: 0.5 * (moduli[2] + moduli[3]),
    })
}

/// max_τ |e_τ − ½|; zero for a pure state.
pub fn purity_defect(state: &GaussianState) -> Result<f64> {
    let s = symplectic_spectrum(state)?;
    Ok((s.largest - 0.5).abs().max((s.smallest - 0.5).abs()))
}

/// 2×2 covariance [[⟨xx⟩, ⟨xp⟩], [⟨px⟩, ⟨pp⟩]] of one oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCovariance {
    pub c11: f64,
    pub c12: f64,
    pub c22: f64,
}

impl ReducedCovariance {
    pub fn determinant(&self) -> f64 {
        self.c11 * self.c22 - self.c12 * self.c12
    }

    /// d = √det, the single symplectic eigenvalue of a one-mode covariance.
    pub fn symplectic_eigenvalue(&self) -> f64 {
        self.determinant().max(0.0).sqrt()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.c11 > 0.0 && self.determinant() > 0.0
    }
}

/// Partial trace onto oscillator `index` (1 or 2).
pub fn reduce_to_oscillator(state: &GaussianState, index: usize) -> Result<ReducedCovariance> {
    let (x, p) = match index {
        1 => (0, 2),
        2 => (1, 3),
        _ => {
            return Err(Error::domain(format!(
                "oscillator index {index} out of range (expected 1 or 2)"
            )))
        }
    };
    let c = &state.cov;
    Ok(ReducedCovariance {
        c11: c[(x, x)],
        c12: c[(x, p)],
        c22: c[(p, p)],
    })
}

/// Von Neumann entropy (nats) of a one-mode Gaussian state.
pub fn entanglement_entropy(reduced: &ReducedCovariance) -> Result<f64> {
    if !reduced.is_positive_definite() {
        return Err(Error::Numeric(format!(
            "reduced covariance {reduced:?} is not positive definite"
        )));
    }
    entropy_from_symplectic(reduced.symplectic_eigenvalue())
}

/// (d + ½)·ln(d + ½) − (d − ½)·ln(d − ½), with d ∈ [½ − 1e−9, ½] clamped to ½.
pub fn entropy_from_symplectic(d: f64) -> Result<f64> {
    if !d.is_finite() {
        return Err(Error::Numeric(format!("symplectic eigenvalue {d} is not finite")));
    }
    if d < 0.5 - UNCERTAINTY_TOL {
        return Err(Error::UncertaintyViolation(d));
    }
    let d = d.max(0.5);
    let upper = d + 0.5;
    let lower = d - 0.5;
    let mixed = if lower <= PURE_STATE_EPS {
        0.0
    } else {
        lower * lower.ln()
    };
    Ok(upper * upper.ln() - mixed)
}

/// Gaussian Wigner function with the inverse covariance and normalization
/// precomputed.
#[derive(Debug, Clone)]
pub struct WignerFunction {
    mean: Vector4<f64>,
    precision: Matrix4<f64>,
    norm: f64,
}

impl WignerFunction {
    pub fn new(state: &GaussianState) -> Result<Self> {
        let chol = state
            .cov
            .cholesky()
            .ok_or_else(|| Error::Numeric("covariance matrix is singular or indefinite".into()))?;
        let det = chol.determinant();
        if !(det.is_finite() && det > 0.0) {
            return Err(Error::Numeric(format!("covariance determinant {det} is not positive")));
        }
        Ok(Self {
            mean: state.mean,
            precision: chol.inverse(),
            norm: 1.0 / (4.0 * PI * PI * det.sqrt()),
        })
    }

    pub fn density(&self, point: &Vector4<f64>) -> f64 {
        let dv = point - self.mean;
        let q = dv.dot(&(self.precision * dv));
        self.norm * (-0.5 * q).exp()
    }

    /// Peak value (4π²√det C)⁻¹.
    pub fn peak(&self) -> f64 {
        self.norm
    }
}

pub fn wigner_density(state: &GaussianState, point: &Vector4<f64>) -> Result<f64> {
    Ok(WignerFunction::new(state)?.density(point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_initial_covariance, stiffness_from_frequencies};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn state(cov: Matrix4<f64>) -> GaussianState {
        GaussianState {
            t: 0.0,
            mean: Vector4::zeros(),
            cov,
        }
    }

    /// |eig(iΛC)| by a complex Schur decomposition; independent of the
    /// real Λ·C route.
    fn complex_moduli(cov: &Matrix4<f64>) -> Vec<f64> {
        let i = Complex64::new(0.0, 1.0);
        let gamma = (symplectic_form() * cov).map(|v| i * v);
        let mut m: Vec<f64> = gamma
            .schur()
            .eigenvalues()
            .expect("triangular complex Schur form")
            .iter()
            .map(|z| z.norm())
            .collect();
        m.sort_by(|a, b| b.total_cmp(a));
        m
    }

    #[test]
    fn spectrum_examples() {
        let s = symplectic_spectrum(&GaussianState::vacuum()).unwrap();
        assert!((s.largest - 0.5).abs() < 1e-15 && (s.smallest - 0.5).abs() < 1e-15);

        let s = symplectic_spectrum(&state(Matrix4::identity())).unwrap();
        let oracle = complex_moduli(&Matrix4::identity());
        assert!(oracle.iter().all(|e| (e - 1.0).abs() < 1e-14));
        assert!((s.largest - 1.0).abs() < 1e-14 && (s.smallest - 1.0).abs() < 1e-14);

        let gs = build_initial_covariance(stiffness_from_frequencies(0.9, 4.9).unwrap());
        let s = symplectic_spectrum(&gs).unwrap();
        assert!((s.largest - 0.5).abs() < 1e-12 && (s.smallest - 0.5).abs() < 1e-12);
    }

    #[test]
    fn reduction_examples() {
        let gs = build_initial_covariance(stiffness_from_frequencies(0.9, 4.9).unwrap());
        let r1 = reduce_to_oscillator(&gs, 1).unwrap();
        assert!((r1.c11 - 0.3287982).abs() < 1e-7);
        assert_eq!(r1.c12, 0.0);
        assert!((r1.c22 - 1.45).abs() < 1e-14);
        assert_eq!(r1, reduce_to_oscillator(&gs, 2).unwrap());

        let v = reduce_to_oscillator(&GaussianState::vacuum(), 1).unwrap();
        assert_eq!((v.c11, v.c12, v.c22), (0.5, 0.0, 0.5));

        assert!(matches!(reduce_to_oscillator(&gs, 0), Err(Error::Domain(_))));
        assert!(matches!(reduce_to_oscillator(&gs, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_from_symplectic(0.5).unwrap(), 0.0);
        let r = ReducedCovariance {
            c11: 0.5,
            c12: 0.0,
            c22: 0.5,
        };
        assert_eq!(entanglement_entropy(&r).unwrap(), 0.0);

        // high-precision reference: 1.5 ln 1.5 − 0.5 ln 0.5
        let s1 = entropy_from_symplectic(1.0).unwrap();
        assert!((s1 - 0.954_771_252_442_219_2).abs() < 1e-15, "{s1}");

        let r = ReducedCovariance {
            c11: 0.25 * (1.0 / 0.9 + 1.0 / 4.9),
            c12: 0.0,
            c22: 1.45,
        };
        assert!((r.symplectic_eigenvalue() - 0.690476).abs() < 1e-6);
        assert!((entanglement_entropy(&r).unwrap() - 0.523416).abs() < 1e-6);
    }

    #[test]
    fn entropy_rejects_uncertainty_violation() {
        assert!(matches!(
            entropy_from_symplectic(0.49),
            Err(Error::UncertaintyViolation(_))
        ));
        // round-off undershoot is clamped
        assert_eq!(entropy_from_symplectic(0.5 - 1e-12).unwrap(), 0.0);
        let bad = ReducedCovariance {
            c11: -1.0,
            c12: 0.0,
            c22: 1.0,
        };
        assert!(entanglement_entropy(&bad).is_err());
    }

    #[test]
    fn entropy_is_monotone_in_d() {
        let values: Vec<f64> = (0..=950)
            .map(|k| entropy_from_symplectic(0.5 + k as f64 * 0.01).unwrap())
            .collect();
        assert!(values.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn purity_defect_examples() {
        let gs = build_initial_covariance(stiffness_from_frequencies(0.17, 4.17).unwrap());
        assert!(purity_defect(&gs).unwrap() < 1e-12);
        assert!(purity_defect(&GaussianState::vacuum()).unwrap() < 1e-15);
        let d = purity_defect(&state(Matrix4::identity())).unwrap();
        assert!((d - 0.5).abs() < 1e-14);
    }

    #[test]
    fn wigner_examples() {
        let vac = GaussianState::vacuum();
        let w = wigner_density(&vac, &Vector4::zeros()).unwrap();
        assert!((w - 1.0 / (PI * PI)).abs() < 1e-15);
        assert!((w - 0.1013212).abs() < 1e-7);

        let mut shifted = build_initial_covariance(stiffness_from_frequencies(0.9, 4.9).unwrap());
        shifted.mean = Vector4::new(0.3, -0.2, 1.0, 0.5);
        let wf = WignerFunction::new(&shifted).unwrap();
        assert_eq!(wf.density(&shifted.mean), wf.peak());
        let det = shifted.cov.determinant();
        assert!((wf.peak() - 1.0 / (4.0 * PI * PI * det.sqrt())).abs() < 1e-12);

        assert!(matches!(
            wigner_density(&state(Matrix4::zeros()), &Vector4::zeros()),
            Err(Error::Numeric(_))
        ));
    }

    /// Conjugation by W ⊕ W with W = [[1, 1], [−1, 1]]/√2 acting on each
    /// quadrature block is symplectic.
    fn mode_mixer() -> Matrix4<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        #[rustfmt::skip]
        let m = Matrix4::new(
             s,  s, 0.0, 0.0,
            -s,  s, 0.0, 0.0,
            0.0, 0.0,  s,  s,
            0.0, 0.0, -s,  s,
        );
        m
    }

    /// Random covariance S·diag(e1, e2, e1, e2)·Sᵀ built from a product of
    /// single-mode squeezers and the mode mixer.
    fn random_covariance(e1: f64, e2: f64, r1: f64, r2: f64, theta: f64) -> Matrix4<f64> {
        let squeeze = Matrix4::from_diagonal(&Vector4::new(r1.exp(), r2.exp(), (-r1).exp(), (-r2).exp()));
        let (c, s) = (theta.cos(), theta.sin());
        #[rustfmt::skip]
        let rotate = Matrix4::new(
             c, 0.0,   s, 0.0,
            0.0, 1.0, 0.0, 0.0,
            -s, 0.0,   c, 0.0,
            0.0, 0.0, 0.0, 1.0,
        );
        let sym = rotate * mode_mixer() * squeeze;
        let lam = symplectic_form();
        debug_assert!((sym.transpose() * lam * sym - lam).amax() < 1e-12);
        let d = Matrix4::from_diagonal(&Vector4::new(e1, e2, e1, e2));
        let cov = sym * d * sym.transpose();
        (cov + cov.transpose()) * 0.5
    }

    proptest! {
        #[test]
        fn spectrum_agrees_with_complex_eigensolve(
            e1 in 0.5f64..5.0, e2 in 0.5f64..5.0,
            r1 in -1.0f64..1.0, r2 in -1.0f64..1.0, theta in 0.0f64..6.3,
        ) {
            let cov = random_covariance(e1, e2, r1, r2, theta);
            let s = spectrum_of(&cov).unwrap();
            let oracle = complex_moduli(&cov);
            prop_assert!((s.largest - 0.5 * (oracle[0] + oracle[1])).abs() < 1e-12);
            prop_assert!((s.smallest - 0.5 * (oracle[2] + oracle[3])).abs() < 1e-12);
            prop_assert!((s.largest - e1.max(e2)).abs() < 1e-10);
            prop_assert!((s.smallest - e1.min(e2)).abs() < 1e-10);
        }

        #[test]
        fn spectrum_invariant_under_mode_mixer(
            e1 in 0.5f64..5.0, e2 in 0.5f64..5.0,
            r1 in -1.0f64..1.0, r2 in -1.0f64..1.0, theta in 0.0f64..6.3,
        ) {
            let cov = random_covariance(e1, e2, r1, r2, theta);
            let m = mode_mixer();
            let conj = m.transpose() * cov * m;
            let a = spectrum_of(&cov).unwrap();
            let b = spectrum_of(&conj).unwrap();
            prop_assert!((a.largest - b.largest).abs() < 1e-12);
            prop_assert!((a.smallest - b.smallest).abs() < 1e-12);
        }
    }

    fn trapezoid_integral(wf: &WignerFunction, half_width: f64, points: usize) -> f64 {
        let h = 2.0 * half_width / (points - 1) as f64;
        let weight = |k: usize| if k == 0 || k == points - 1 { 0.5 } else { 1.0 };
        let grid: Vec<f64> = (0..points).map(|k| -half_width + k as f64 * h).collect();
        let mut total = 0.0;
        for (i, &a) in grid.iter().enumerate() {
            for (j, &b) in grid.iter().enumerate() {
                let wij = weight(i) * weight(j);
                for (k, &c) in grid.iter().enumerate() {
                    let wijk = wij * weight(k);
                    for (l, &d) in grid.iter().enumerate() {
                        total += wijk * weight(l) * wf.density(&Vector4::new(a, b, c, d));
                    }
                }
            }
        }
        total * h.powi(4)
    }

    #[test]
    fn vacuum_wigner_integrates_to_one() {
        let wf = WignerFunction::new(&GaussianState::vacuum()).unwrap();
        let total = trapezoid_integral(&wf, 8.0, 161);
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn mixed_wigner_integrates_to_one() {
        for (e1, e2, r1, r2, th) in [(0.5, 0.5, 0.4, -0.3, 1.0), (5.0, 0.7, 0.2, 0.1, 2.0), (2.0, 3.0, -0.5, 0.5, 0.3)] {
            let wf = WignerFunction::new(&state(random_covariance(e1, e2, r1, r2, th))).unwrap();
            let total = trapezoid_integral(&wf, 20.0, 101);
            assert!((total - 1.0).abs() < 1e-6, "{total}");
        }
    }
}
