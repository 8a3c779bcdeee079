//! Dense-matrix oracle used by the integration tests.
//!
//! Everything here re-derives the physics from scratch on a flattened
//! vector over (Alice pol) ⊗ (coin) ⊗ (position ∈ [−span, span]): explicit
//! dense step matrices, dense conditioning by index arithmetic, and the
//! correlation tensor's nuclear norm via the eigenvalues of TᵀT. None of
//! the library's sparse-state code paths are involved.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix4, SymmetricEigen};
use num_complex::Complex64 as C64;
use triwalk_core::hilbert::TripartiteState;

/// Ideal-input average entanglement at steps 0..=8, frozen from the dense
/// brute-force computation before the build.
pub const IDEAL_E_AVG: [f64; 9] =
    [1.0, 0.0, 0.5, 0.5, 0.375, 0.375, 0.4375, 0.4375, 0.3984375];

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub struct DenseWalker {
    span: i32,
    vec: DVector<C64>,
}

impl DenseWalker {
    pub fn width(span: i32) -> usize {
        (2 * span + 1) as usize
    }

    fn flat(span: i32, alice: usize, coin: usize, x: i32) -> usize {
        (alice * 2 + coin) * Self::width(span) + (x + span) as usize
    }

    /// Flattens a sparse state onto the lattice [−span, span].
    pub fn from_state(state: &TripartiteState, span: i32) -> Self {
        let mut vec = DVector::zeros(4 * Self::width(span));
        for (&(a, c, x), &amp) in state.iter() {
            assert!(x.abs() <= span, "state support exceeds oracle lattice");
            vec[Self::flat(span, a.index(), c.index(), x)] = amp;
        }
        Self { span, vec }
    }

    pub fn amplitude(&self, alice: usize, coin: usize, x: i32) -> C64 {
        if x.abs() > self.span {
            C64::new(0.0, 0.0)
        } else {
            self.vec[Self::flat(self.span, alice, coin, x)]
        }
    }

    fn coin_matrix(span: i32) -> DMatrix<C64> {
        let dim = 4 * Self::width(span);
        let h = [
            [C64::new(SQRT_HALF, 0.0), C64::new(SQRT_HALF, 0.0)],
            [C64::new(SQRT_HALF, 0.0), C64::new(-SQRT_HALF, 0.0)],
        ];
        let mut m = DMatrix::zeros(dim, dim);
        for a in 0..2 {
            for p in 0..2 {
                for q in 0..2 {
                    for x in -span..=span {
                        m[(Self::flat(span, a, p, x), Self::flat(span, a, q, x))] = h[p][q];
                    }
                }
            }
        }
        m
    }

    fn shift_matrix(span: i32) -> DMatrix<C64> {
        let dim = 4 * Self::width(span);
        let mut m = DMatrix::zeros(dim, dim);
        for a in 0..2 {
            for x in -span..=span {
                if x < span {
                    m[(Self::flat(span, a, 0, x + 1), Self::flat(span, a, 0, x))] =
                        C64::new(1.0, 0.0);
                }
                if x > -span {
                    m[(Self::flat(span, a, 1, x - 1), Self::flat(span, a, 1, x))] =
                        C64::new(1.0, 0.0);
                }
            }
        }
        m
    }

    /// Applies the dense (Ŝ·Ĉ) matrix `t` times.
    pub fn evolve_steps(&mut self, t: u32) {
        let u = Self::shift_matrix(self.span) * Self::coin_matrix(self.span);
        for _ in 0..t {
            self.vec = &u * &self.vec;
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.vec.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn position_probability(&self, x: i32) -> f64 {
        (0..2)
            .flat_map(|a| (0..2).map(move |c| (a, c)))
            .map(|(a, c)| self.amplitude(a, c, x).norm_sqr())
            .sum()
    }

    /// Unnormalized 4×4 block |ψ_x⟩⟨ψ_x| and its weight at position x.
    pub fn position_block(&self, x: i32) -> (Matrix4<C64>, f64) {
        let mut ket = [C64::new(0.0, 0.0); 4];
        for a in 0..2 {
            for c in 0..2 {
                ket[a * 2 + c] = self.amplitude(a, c, x);
            }
        }
        let mut outer = Matrix4::zeros();
        let mut p = 0.0;
        for i in 0..4 {
            p += ket[i].norm_sqr();
            for j in 0..4 {
                outer[(i, j)] = ket[i] * ket[j].conj();
            }
        }
        (outer, p)
    }
}

/// Entanglement quantifier recomputed from first principles: Pauli traces
/// by explicit index sums, nuclear norm via sqrt-eigenvalues of TᵀT.
pub fn dense_chsh(rho: &Matrix4<C64>) -> f64 {
    let paulis: [[[C64; 2]; 2]; 3] = [
        [
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ],
        [
            [C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
            [C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        ],
        [
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
        ],
    ];
    let mut t = Matrix3::<f64>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut trace = C64::new(0.0, 0.0);
            // tr[ρ (σi ⊗ σj)] = Σ ρ[(m1 m2),(n1 n2)] σi[n1][m1] σj[n2][m2]
            for m1 in 0..2 {
                for m2 in 0..2 {
                    for n1 in 0..2 {
                        for n2 in 0..2 {
                            trace += rho[(m1 * 2 + m2, n1 * 2 + n2)]
                                * paulis[i][n1][m1]
                                * paulis[j][n2][m2];
                        }
                    }
                }
            }
            assert!(trace.im.abs() < 1e-9, "imaginary correlation trace");
            t[(i, j)] = trace.re;
        }
    }
    let gram = t.transpose() * t;
    let eig = SymmetricEigen::new(gram);
    let s: f64 = eig.eigenvalues.iter().map(|&v| v.max(0.0).sqrt()).sum();
    let q = (s - 1.0) / 4.0;
    q + q.abs()
}

/// Mixture average entanglement Σ_x P(x)·E(x) over dense branches.
pub fn dense_e_avg(branches: &[(f64, DenseWalker)], span: i32) -> f64 {
    let mut total = 0.0;
    for x in -span..=span {
        let mut block = Matrix4::<C64>::zeros();
        let mut p = 0.0;
        for (w, walker) in branches {
            let (outer, bp) = walker.position_block(x);
            block += outer * C64::new(*w, 0.0);
            p += w * bp;
        }
        if p < 1e-12 {
            continue;
        }
        total += p * dense_chsh(&(block / C64::new(p, 0.0)));
    }
    total
}
