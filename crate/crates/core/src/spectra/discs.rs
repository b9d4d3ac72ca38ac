use std::f64::consts::PI;

use serde::Serialize;

use crate::linalg::{c, sqrt_toward, C64};

use super::Kind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiscKind {
    /// `D^i_n`, `n != 0`, `i` in `{1, 2}`.
    Dn {
        i: u8,
        n: i64,
    },
    D0,
    /// `B_N`.
    BN {
        n: usize,
    },
}

/// Localization region in the lambda-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscSpec {
    pub kind: DiscKind,
    pub center: C64,
    /// Dilation applied to the nominal boundary (1 = nominal).
    pub dilation: f64,
}

/// `sgn(n) sqrt((-1)^{i-1} |n| pi / 2)`, the unperturbed eigenvalue labelled `(i, n)`.
pub fn zero_potential_eigenvalue(i: u8, n: i64) -> C64 {
    let a = (n.unsigned_abs() as f64 * PI / 2.0).sqrt();
    let s = n.signum() as f64;
    if i == 1 {
        c(s * a, 0.0)
    } else {
        c(0.0, s * a)
    }
}

pub fn b_radius(n: usize) -> f64 {
    ((n as f64 + 0.25) * PI / 2.0).sqrt()
}

pub fn d0_radius() -> f64 {
    (PI / 8.0).sqrt()
}

impl DiscSpec {
    pub fn dn(i: u8, n: i64) -> Self {
        assert!(n != 0 && (i == 1 || i == 2));
        DiscSpec { kind: DiscKind::Dn { i, n }, center: zero_potential_eigenvalue(i, n), dilation: 1.0 }
    }

    pub fn d0() -> Self {
        DiscSpec { kind: DiscKind::D0, center: c(0.0, 0.0), dilation: 1.0 }
    }

    pub fn bn(n: usize) -> Self {
        DiscSpec { kind: DiscKind::BN { n }, center: c(0.0, 0.0), dilation: 1.0 }
    }

    pub fn dilated(&self, step: usize) -> Self {
        DiscSpec { dilation: 1.05f64.powi(step as i32), ..*self }
    }

    /// Radius in `w = 2 lambda^2` for `D^i_n`, in `lambda` for the central discs.
    fn radius(&self) -> f64 {
        match self.kind {
            DiscKind::Dn { .. } => PI / 4.0 * self.dilation,
            DiscKind::D0 => d0_radius() * self.dilation,
            DiscKind::BN { n } => {
                let r = b_radius(n);
                // stay inside the root-free annulus between B_N and D_{N+1}
                let cap = ((n as f64 + 0.75) * PI / 2.0).sqrt();
                r + (self.dilation - 1.0) * (cap - r)
            }
        }
    }

    pub fn contains(&self, z: C64) -> bool {
        match self.kind {
            DiscKind::Dn { i, n } => {
                let wc = if i == 1 { n.unsigned_abs() as f64 * PI } else { -(n.unsigned_abs() as f64) * PI };
                let half = if i == 1 { z.re * n.signum() as f64 > 0.0 } else { z.im * n.signum() as f64 > 0.0 };
                half && (z * z * 2.0 - wc).norm() < self.radius()
            }
            _ => z.norm() < self.radius(),
        }
    }

    /// Trapezoid nodes `z_k` and weights `z'(theta_k) 2 pi / p` on the boundary.
    pub fn boundary(&self, p: usize) -> Vec<(C64, C64)> {
        let r = self.radius();
        (0..p)
            .map(|k| {
                let th = 2.0 * PI * (k as f64 / p as f64);
                let e = C64::from_polar(1.0, th);
                let dth = 2.0 * PI / p as f64;
                match self.kind {
                    DiscKind::Dn { i, n } => {
                        let wc = if i == 1 { n.unsigned_abs() as f64 * PI } else { -(n.unsigned_abs() as f64) * PI };
                        let w = e * r + wc;
                        let z = sqrt_toward(w / 2.0, self.center);
                        let dz = c(0.0, 1.0) * e * r / (z * 4.0);
                        (z, dz * dth)
                    }
                    _ => (e * r, c(0.0, 1.0) * e * r * dth),
                }
            })
            .collect()
    }

    /// Nominal boundary sampled for plotting.
    pub fn outline(&self, p: usize) -> Vec<C64> {
        self.boundary(p).into_iter().map(|(z, _)| z).collect()
    }
}

/// Roots of the kind's characteristic function expected in `B_N`.
pub fn expected_in_b(kind: Kind, n: usize) -> usize {
    match kind {
        Kind::Dirichlet | Kind::Neumann => 2 * (2 * n + 1),
        Kind::Periodic => 4 * (2 * n + 1),
        Kind::Critical => 4 * n + 3,
    }
}

/// Roots expected in each `D^i_n` with `|n| > N`.
pub fn expected_in_disc(kind: Kind) -> usize {
    match kind {
        Kind::Periodic => 2,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dn_boundary_encloses_center_and_sits_in_half_plane() {
        for &(i, n) in &[(1u8, 1i64), (1, -3), (2, 2), (2, -1), (1, 8)] {
            let d = DiscSpec::dn(i, n);
            assert!(d.contains(d.center));
            for (z, _) in d.boundary(64) {
                let w = z * z * 2.0;
                let wc = if i == 1 { n.abs() as f64 * PI } else { -(n.abs() as f64) * PI };
                assert!(((w - wc).norm() - PI / 4.0).abs() < 1e-12);
                let side = if i == 1 { z.re } else { z.im };
                assert!(side * n.signum() as f64 > 0.0);
            }
        }
    }

    #[test]
    fn inner_discs_lie_in_bn() {
        for big_n in 1..6usize {
            let b = DiscSpec::bn(big_n);
            for n in 1..=big_n as i64 {
                for s in [-1, 1] {
                    for i in [1u8, 2] {
                        for (z, _) in DiscSpec::dn(i, s * n).boundary(64) {
                            assert!(z.norm() <= b_radius(big_n) + 1e-12);
                            assert!(b.dilated(1).contains(z));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn boundary_weights_integrate_to_winding_one() {
        let d = DiscSpec::dn(2, -2);
        let s: C64 = d.boundary(256).into_iter().map(|(z, w)| w / (z - d.center)).sum();
        assert!((s / c(0.0, 2.0 * PI) - 1.0).norm() < 1e-12);
    }
}
