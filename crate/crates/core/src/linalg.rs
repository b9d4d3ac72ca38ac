use std::ops::{Add, AddAssign, Mul, Neg, Sub};

pub use num_complex::Complex64 as C64;

#[inline]
pub const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub const I: C64 = c(0.0, 1.0);
pub const ZERO: C64 = c(0.0, 0.0);
pub const ONE: C64 = c(1.0, 0.0);

/// 2x2 complex matrix stored row-major as `[m1, m2, m3, m4]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [C64; 4]);

impl Mat2 {
    pub const fn new(m1: C64, m2: C64, m3: C64, m4: C64) -> Self {
        Mat2([m1, m2, m3, m4])
    }

    pub const fn zero() -> Self {
        Mat2([ZERO; 4])
    }

    pub const fn identity() -> Self {
        Mat2([ONE, ZERO, ZERO, ONE])
    }

    pub const fn diag(a: C64, d: C64) -> Self {
        Mat2([a, ZERO, ZERO, d])
    }

    pub const fn sigma1() -> Self {
        Mat2([ZERO, ONE, ONE, ZERO])
    }

    pub const fn sigma3() -> Self {
        Mat2([ONE, ZERO, ZERO, c(-1.0, 0.0)])
    }

    pub fn det(&self) -> C64 {
        let [a, b, cc, d] = self.0;
        a * d - b * cc
    }

    pub fn trace(&self) -> C64 {
        self.0[0] + self.0[3]
    }

    /// Inverse of a unimodular matrix, `[[m4, -m2], [-m3, m1]]`.
    pub fn wronskian_inverse(&self) -> Self {
        let [a, b, cc, d] = self.0;
        Mat2([d, -b, -cc, a])
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2(self.0.map(|x| x * s))
    }

    pub fn conj(&self) -> Self {
        Mat2(self.0.map(|x| x.conj()))
    }

    pub fn off_diagonal(&self) -> Self {
        Mat2([ZERO, self.0[1], self.0[2], ZERO])
    }

    pub fn diagonal(&self) -> Self {
        Mat2([self.0[0], ZERO, ZERO, self.0[3]])
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, o: Mat2) {
        for i in 0..4 {
            self.0[i] += o.0[i];
        }
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2(self.0.map(|x| -x))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let [a, b, cc, d] = self.0;
        let [e, f, g, h] = o.0;
        Mat2([a * e + b * g, a * f + b * h, cc * e + d * g, cc * f + d * h])
    }
}

impl Mul<C64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: C64) -> Mat2 {
        self.scale(s)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        Mat2(self.0.map(|x| x * s))
    }
}

impl Mul<[C64; 2]> for Mat2 {
    type Output = [C64; 2];
    fn mul(self, v: [C64; 2]) -> [C64; 2] {
        [self.0[0] * v[0] + self.0[1] * v[1], self.0[2] * v[0] + self.0[3] * v[1]]
    }
}

/// Principal square root with the branch cut moved so the result lies in
/// the half plane selected by `dir` (`Re(sqrt * conj(dir)) >= 0`).
pub fn sqrt_toward(z: C64, dir: C64) -> C64 {
    let r = z.sqrt();
    if (r * dir.conj()).re >= 0.0 {
        r
    } else {
        -r
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Simpson weights for `n` (even) uniform intervals of width `h`.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2 && n % 2 == 0, "simpson needs an even number of intervals");
    let mut w = vec![0.0; n + 1];
    for (j, wj) in w.iter_mut().enumerate() {
        *wj = if j == 0 || j == n {
            h / 3.0
        } else if j % 2 == 1 {
            4.0 * h / 3.0
        } else {
            2.0 * h / 3.0
        };
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wronskian_inverse_is_inverse_for_unimodular() {
        let a = c(1.3, 0.2);
        let b = c(-0.4, 0.9);
        let cc = c(0.25, -1.1);
        let d = (ONE + b * cc) / a;
        let m = Mat2::new(a, b, cc, d);
        let p = m * m.wronskian_inverse();
        assert!((p - Mat2::identity()).norm() < 1e-14);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((s - 0.4).abs() < 1e-14);
    }

    #[test]
    fn simpson_exact_for_cubics() {
        let n = 10;
        let h = 0.1;
        let w = simpson_weights(n, h);
        let s: f64 = (0..=n).map(|j| w[j] * (j as f64 * h).powi(3)).sum();
        assert!((s - 0.25).abs() < 1e-14);
    }
}
