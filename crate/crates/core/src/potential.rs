use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, C64, I, ONE, ZERO};

pub const DEFAULT_K: usize = 16;
pub const MAX_K: usize = 256;
pub const CLASSIFY_TOL: f64 = 1e-12;

/// Anything that can be sampled as `(psi1, psi2, psi3, psi4)` at time `t`.
pub trait PotentialField: Sync {
    fn eval(&self, t: f64) -> [C64; 4];
}

impl<F: Fn(f64) -> [C64; 4] + Sync> PotentialField for F {
    fn eval(&self, t: f64) -> [C64; 4] {
        self(t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PotentialType {
    RealType,
    ImaginaryType,
    General,
}

/// `psi = (alpha e^{i omega t}, sigma conj(alpha) e^{-i omega t}, c e^{i omega t}, sigma conj(c) e^{-i omega t})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleExpParams {
    pub sigma: f64,
    pub omega: f64,
    pub alpha: C64,
    pub c: C64,
}

impl SingleExpParams {
    pub fn new(sigma: f64, omega: f64, alpha: C64, c: C64) -> Self {
        SingleExpParams { sigma, omega, alpha, c }
    }
}

/// Truncated Fourier series of the four potential components,
/// modes `-K..=K`, period 1.
#[derive(Clone, Debug)]
pub struct Potential {
    k: usize,
    coeffs: [Vec<C64>; 4],
    modes: [Vec<(i64, C64)>; 4],
    kmax: usize,
    single: Option<SingleExpParams>,
}

impl Potential {
    pub fn zero(k: usize) -> Self {
        Self::build(k, std::array::from_fn(|_| vec![ZERO; 2 * k + 1]), None)
    }

    pub fn from_coeffs(k: usize, coeffs: [Vec<C64>; 4]) -> Result<Self> {
        if k > MAX_K {
            return Err(Error::InvalidInput(format!("K = {k} exceeds {MAX_K}")));
        }
        for (j, cj) in coeffs.iter().enumerate() {
            if cj.len() != 2 * k + 1 {
                return Err(Error::InvalidInput(format!(
                    "component {} has {} coefficients, expected {}",
                    j + 1,
                    cj.len(),
                    2 * k + 1
                )));
            }
            if cj.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidInput(format!("component {} is not finite", j + 1)));
            }
        }
        Ok(Self::build(k, coeffs, None))
    }

    /// Single-exponential potential; `omega` must be an integer multiple of `2 pi`.
    pub fn single_exp(p: SingleExpParams, k: usize) -> Result<Self> {
        if p.sigma != 1.0 && p.sigma != -1.0 {
            return Err(Error::InvalidInput("sigma must be +1 or -1".into()));
        }
        let m = p.omega / (2.0 * PI);
        let mi = m.round();
        if (m - mi).abs() > 1e-12 || mi.abs() as usize > k {
            return Err(Error::InvalidInput(format!("omega = {} is not 2 pi m with |m| <= {k}", p.omega)));
        }
        let mi = mi as i64;
        let mut coeffs: [Vec<C64>; 4] = std::array::from_fn(|_| vec![ZERO; 2 * k + 1]);
        let ix = |n: i64| (n + k as i64) as usize;
        coeffs[0][ix(mi)] = p.alpha;
        coeffs[1][ix(-mi)] = p.alpha.conj() * p.sigma;
        coeffs[2][ix(mi)] = p.c;
        coeffs[3][ix(-mi)] = p.c.conj() * p.sigma;
        Ok(Self::build(k, coeffs, Some(p)))
    }

    fn build(k: usize, coeffs: [Vec<C64>; 4], single: Option<SingleExpParams>) -> Self {
        let modes: [Vec<(i64, C64)>; 4] = std::array::from_fn(|j| {
            coeffs[j].iter().enumerate().filter(|(_, z)| **z != ZERO).map(|(i, z)| (i as i64 - k as i64, *z)).collect()
        });
        let kmax = modes.iter().flat_map(|m| m.iter().map(|(n, _)| n.unsigned_abs() as usize)).max().unwrap_or(0);
        Potential { k, coeffs, modes, kmax, single }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coeffs(&self) -> &[Vec<C64>; 4] {
        &self.coeffs
    }

    /// Coefficient of `e^{2 pi i n t}` in component `j` (0-based).
    pub fn coeff(&self, j: usize, n: i64) -> C64 {
        if n.unsigned_abs() as usize > self.k {
            return ZERO;
        }
        self.coeffs[j][(n + self.k as i64) as usize]
    }

    pub fn single_exp_params(&self) -> Option<SingleExpParams> {
        self.single
    }

    pub fn is_zero(&self) -> bool {
        self.kmax == 0 && self.modes.iter().all(|m| m.is_empty())
    }

    pub fn component(&self, j: usize) -> TrigPoly {
        TrigPoly::new(self.k, self.coeffs[j].clone())
    }

    /// Same coefficients padded or truncated to `k` modes.
    pub fn with_k(&self, k: usize) -> Self {
        let coeffs = std::array::from_fn(|j| (0..=2 * k).map(|i| self.coeff(j, i as i64 - k as i64)).collect());
        let single = self.single.filter(|_| k >= self.kmax);
        Self::build(k, coeffs, single)
    }

    /// `t -> psi(t + s)`.
    pub fn shifted(&self, s: f64) -> Self {
        let k = self.k as i64;
        let coeffs = std::array::from_fn(|j| {
            self.coeffs[j]
                .iter()
                .enumerate()
                .map(|(i, z)| z * C64::from_polar(1.0, 2.0 * PI * (i as i64 - k) as f64 * s))
                .collect()
        });
        let single = self.single.map(|p| {
            let ph = C64::from_polar(1.0, p.omega * s);
            SingleExpParams { alpha: p.alpha * ph, c: p.c * ph, ..p }
        });
        Self::build(self.k, coeffs, single)
    }

    /// `psi* = (conj psi2, conj psi1, conj psi4, conj psi3)`.
    pub fn star(&self) -> Self {
        let k = self.k as i64;
        let flip = |j: usize| -> Vec<C64> { (-k..=k).map(|n| self.coeff(j, -n).conj()).collect() };
        Self::build(self.k, [flip(1), flip(0), flip(3), flip(2)], None)
    }

    pub fn scaled(&self, s: C64) -> Self {
        let coeffs = std::array::from_fn(|j| self.coeffs[j].iter().map(|z| z * s).collect());
        Self::build(self.k, coeffs, None)
    }

    /// `self + eps * h` on the larger of the two mode ranges.
    pub fn axpy(&self, eps: C64, h: &Potential) -> Self {
        let k = self.k.max(h.k);
        let coeffs = std::array::from_fn(|j| {
            (0..=2 * k)
                .map(|i| {
                    let n = i as i64 - k as i64;
                    self.coeff(j, n) + eps * h.coeff(j, n)
                })
                .collect()
        });
        Self::build(k, coeffs, None)
    }

    /// `d psi / dt`.
    pub fn derivative(&self) -> Self {
        let k = self.k as i64;
        let coeffs = std::array::from_fn(|j| {
            self.coeffs[j].iter().enumerate().map(|(i, z)| z * c(0.0, 2.0 * PI * (i as i64 - k) as f64)).collect()
        });
        Self::build(self.k, coeffs, None)
    }

    pub fn classify(&self, tol: f64) -> PotentialType {
        let scale = self.coeffs.iter().flat_map(|v| v.iter().map(|z| z.norm())).fold(1.0, f64::max);
        let star = self.star();
        let dist = |sign: f64| {
            (0..4)
                .flat_map(|j| {
                    let star = &star;
                    (0..=2 * self.k).map(move |i| (self.coeffs[j][i] - star.coeffs[j][i] * sign).norm())
                })
                .fold(0.0, f64::max)
        };
        if dist(1.0) <= tol * scale {
            PotentialType::RealType
        } else if dist(-1.0) <= tol * scale {
            PotentialType::ImaginaryType
        } else {
            PotentialType::General
        }
    }

    /// `L^2([0,1])` norm of the four components together.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().flat_map(|v| v.iter()).map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Bound on `max_j sup_t |psi_j(t)|`.
    pub fn sup_bound(&self) -> f64 {
        self.coeffs.iter().map(|v| v.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Random potential with modes `|n| <= modes`, rescaled to `l2_norm() == norm`.
    pub fn random<R: Rng>(rng: &mut R, k: usize, modes: usize, norm: f64, kind: PotentialType) -> Self {
        let modes = modes.min(k) as i64;
        let k_i = k as i64;
        let mut coeffs: [Vec<C64>; 4] = std::array::from_fn(|_| vec![ZERO; 2 * k + 1]);
        let ix = |n: i64| (n + k_i) as usize;
        let draw = |n: i64, rng: &mut R| {
            let w = 1.0 / (1.0 + (n * n) as f64);
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * w
        };
        for n in -modes..=modes {
            coeffs[0][ix(n)] = draw(n, rng);
            coeffs[2][ix(n)] = draw(n, rng);
        }
        let sign = match kind {
            PotentialType::RealType => Some(1.0),
            PotentialType::ImaginaryType => Some(-1.0),
            PotentialType::General => None,
        };
        for n in -modes..=modes {
            match sign {
                Some(s) => {
                    coeffs[1][ix(n)] = coeffs[0][ix(-n)].conj() * s;
                    coeffs[3][ix(n)] = coeffs[2][ix(-n)].conj() * s;
                }
                None => {
                    coeffs[1][ix(n)] = draw(n, rng);
                    coeffs[3][ix(n)] = draw(n, rng);
                }
            }
        }
        let p = Self::build(k, coeffs, None);
        let nrm = p.l2_norm();
        if nrm == 0.0 {
            p
        } else {
            p.scaled(c(norm / nrm, 0.0))
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: PotentialSpec = serde_json::from_str(s)?;
        spec.into_potential()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let coeffs: Vec<Vec<[f64; 2]>> = self.coeffs.iter().map(|v| v.iter().map(|z| [z.re, z.im]).collect()).collect();
        serde_json::json!({ "K": self.k, "coeffs": coeffs })
    }
}

/// AKNS coordinates `(q0, p0, q1, p1)` of a potential.
#[derive(Clone, Debug, PartialEq)]
pub struct AknsCoordinates {
    pub q0: TrigPoly,
    pub p0: TrigPoly,
    pub q1: TrigPoly,
    pub p1: TrigPoly,
}

impl Potential {
    /// `q0 = (psi1 + psi2)/2`, `p0 = -i (psi1 - psi2)/2`, likewise `q1, p1` from `psi3, psi4`.
    pub fn to_akns(&self) -> AknsCoordinates {
        let h = c(0.5, 0.0);
        let mh = c(0.0, -0.5);
        let [a, b, cc, d] = std::array::from_fn(|j| self.component(j));
        AknsCoordinates {
            q0: a.add(&b).scale(h),
            p0: a.add(&b.scale(-ONE)).scale(mh),
            q1: cc.add(&d).scale(h),
            p1: cc.add(&d.scale(-ONE)).scale(mh),
        }
    }

    pub fn from_akns(x: &AknsCoordinates) -> Result<Self> {
        let k = x.q0.k.max(x.p0.k).max(x.q1.k).max(x.p1.k);
        let pad = |p: &TrigPoly| (-(k as i64)..=k as i64).map(|n| p.coeff(n)).collect::<Vec<_>>();
        let (q0, p0, q1, p1) = (pad(&x.q0), pad(&x.p0), pad(&x.q1), pad(&x.p1));
        let comb = |q: &[C64], p: &[C64], s: f64| q.iter().zip(p).map(|(q, p)| q + I * p * s).collect::<Vec<_>>();
        Self::from_coeffs(k, [comb(&q0, &p0, 1.0), comb(&q0, &p0, -1.0), comb(&q1, &p1, 1.0), comb(&q1, &p1, -1.0)])
    }
}

impl PotentialField for Potential {
    fn eval(&self, t: f64) -> [C64; 4] {
        let mut out = [ZERO; 4];
        if self.kmax == 0 {
            for j in 0..4 {
                if let Some((_, z)) = self.modes[j].first() {
                    out[j] = *z;
                }
            }
            return out;
        }
        let mut pw = [ZERO; MAX_K + 1];
        let z = C64::from_polar(1.0, 2.0 * PI * t);
        pw[0] = c(1.0, 0.0);
        for p in 1..=self.kmax {
            pw[p] = pw[p - 1] * z;
        }
        for j in 0..4 {
            let mut s = ZERO;
            for &(n, a) in &self.modes[j] {
                s += if n >= 0 { a * pw[n as usize] } else { a * pw[(-n) as usize].conj() };
            }
            out[j] = s;
        }
        out
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PotentialSpec {
    Coeffs {
        #[serde(rename = "K")]
        k: usize,
        coeffs: Vec<Vec<[f64; 2]>>,
    },
    Single {
        singleexp: SingleExpSpec,
        #[serde(rename = "K", default)]
        k: Option<usize>,
    },
}

#[derive(Deserialize)]
struct SingleExpSpec {
    sigma: f64,
    omega: f64,
    alpha: [f64; 2],
    c: [f64; 2],
}

impl PotentialSpec {
    fn into_potential(self) -> Result<Potential> {
        match self {
            PotentialSpec::Coeffs { k, coeffs } => {
                if coeffs.len() != 4 {
                    return Err(Error::InvalidInput(format!("expected 4 components, got {}", coeffs.len())));
                }
                let mut it = coeffs.into_iter().map(|v| v.into_iter().map(|[a, b]| c(a, b)).collect());
                let arr = std::array::from_fn(|_| it.next().unwrap());
                Potential::from_coeffs(k, arr)
            }
            PotentialSpec::Single { singleexp: s, k } => Potential::single_exp(
                SingleExpParams::new(s.sigma, s.omega, c(s.alpha[0], s.alpha[1]), c(s.c[0], s.c[1])),
                k.unwrap_or(DEFAULT_K),
            ),
        }
    }
}

/// Trigonometric polynomial `sum_{|n| <= k} a_n e^{2 pi i n t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    pub k: usize,
    pub a: Vec<C64>,
}

impl TrigPoly {
    pub fn new(k: usize, a: Vec<C64>) -> Self {
        assert_eq!(a.len(), 2 * k + 1);
        TrigPoly { k, a }
    }

    pub fn zero(k: usize) -> Self {
        TrigPoly { k, a: vec![ZERO; 2 * k + 1] }
    }

    pub fn coeff(&self, n: i64) -> C64 {
        if n.unsigned_abs() as usize > self.k {
            ZERO
        } else {
            self.a[(n + self.k as i64) as usize]
        }
    }

    pub fn mean(&self) -> C64 {
        self.a[self.k]
    }

    pub fn eval(&self, t: f64) -> C64 {
        let k = self.k as i64;
        self.a.iter().enumerate().map(|(i, z)| z * C64::from_polar(1.0, 2.0 * PI * (i as i64 - k) as f64 * t)).sum()
    }

    /// Exact product; the result carries `k1 + k2` modes.
    pub fn mul(&self, o: &TrigPoly) -> TrigPoly {
        let k = self.k + o.k;
        let mut a = vec![ZERO; 2 * k + 1];
        for (i, x) in self.a.iter().enumerate() {
            if *x == ZERO {
                continue;
            }
            for (j, y) in o.a.iter().enumerate() {
                a[i + j] += x * y;
            }
        }
        TrigPoly { k, a }
    }

    pub fn add(&self, o: &TrigPoly) -> TrigPoly {
        let k = self.k.max(o.k);
        let a = (-(k as i64)..=k as i64).map(|n| self.coeff(n) + o.coeff(n)).collect();
        TrigPoly { k, a }
    }

    pub fn scale(&self, s: C64) -> TrigPoly {
        TrigPoly { k: self.k, a: self.a.iter().map(|z| z * s).collect() }
    }

    pub fn truncate(&self, k: usize) -> TrigPoly {
        TrigPoly { k, a: (-(k as i64)..=k as i64).map(|n| self.coeff(n)).collect() }
    }

    pub fn derivative(&self) -> TrigPoly {
        let k = self.k as i64;
        let a = self.a.iter().enumerate().map(|(i, z)| z * c(0.0, 2.0 * PI * (i as i64 - k) as f64)).collect();
        TrigPoly { k: self.k, a }
    }

    /// `int_0^t f(s) ds`.
    pub fn integral_from_zero(&self, t: f64) -> C64 {
        let k = self.k as i64;
        let mut s = self.mean() * t;
        for (i, z) in self.a.iter().enumerate() {
            let n = i as i64 - k;
            if n != 0 && *z != ZERO {
                let w = 2.0 * PI * n as f64;
                s += z * (C64::from_polar(1.0, w * t) - 1.0) / c(0.0, w);
            }
        }
        s
    }

    pub fn sup_bound(&self) -> f64 {
        self.a.iter().map(|z| z.norm()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn akns_examples_and_round_trip() {
        let p = Potential::from_coeffs(0, [vec![I], vec![-I], vec![ZERO], vec![ZERO]]).unwrap();
        let a = p.to_akns();
        assert!((a.q0.coeff(0)).norm() < 1e-15 && (a.p0.coeff(0) - ONE).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = Potential::random(&mut rng, 5, 5, 1.0, PotentialType::General);
        let back = Potential::from_akns(&r.to_akns()).unwrap();
        for j in 0..4 {
            for n in -5..=5 {
                assert!((back.coeff(j, n) - r.coeff(j, n)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_classifies_real() {
        assert_eq!(Potential::zero(4).classify(CLASSIFY_TOL), PotentialType::RealType);
    }

    #[test]
    fn single_exp_types() {
        let p = SingleExpParams::new(1.0, -2.0 * PI, c(0.4, 2.75), c(0.1, 0.0));
        assert_eq!(Potential::single_exp(p, 16).unwrap().classify(CLASSIFY_TOL), PotentialType::RealType);
        let p = SingleExpParams::new(-1.0, -2.0 * PI, c(0.5, 0.0), c(0.0, 1.3));
        assert_eq!(Potential::single_exp(p, 16).unwrap().classify(CLASSIFY_TOL), PotentialType::ImaginaryType);
    }

    #[test]
    fn single_exp_samples_match_formula() {
        let p = SingleExpParams::new(-1.0, -2.0 * PI, c(0.3, -0.2), c(0.7, 0.1));
        let pot = Potential::single_exp(p, 4).unwrap();
        for &t in &[0.0, 0.13, 0.5, 0.97] {
            let e = C64::from_polar(1.0, p.omega * t);
            let v = pot.eval(t);
            let want = [p.alpha * e, -p.alpha.conj() / e, p.c * e, -p.c.conj() / e];
            for j in 0..4 {
                assert!((v[j] - want[j]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn random_symmetric_kinds_classify() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in [PotentialType::RealType, PotentialType::ImaginaryType, PotentialType::General] {
            let p = Potential::random(&mut rng, 8, 5, 1.0, kind);
            assert_eq!(p.classify(CLASSIFY_TOL), kind);
            assert!((p.l2_norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn shift_and_derivative_agree_with_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = Potential::random(&mut rng, 6, 6, 2.0, PotentialType::General);
        let sh = p.shifted(0.3);
        let d = p.derivative();
        for &t in &[0.1, 0.45, 0.8] {
            let a = sh.eval(t);
            let b = p.eval(t + 0.3);
            let h = 1e-5;
            let fd: Vec<C64> = (0..4).map(|j| (p.eval(t + h)[j] - p.eval(t - h)[j]) / (2.0 * h)).collect();
            for j in 0..4 {
                assert!((a[j] - b[j]).norm() < 1e-13);
                assert!((d.eval(t)[j] - fd[j]).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn trig_integral_matches_quadrature() {
        let f = TrigPoly::new(2, vec![c(0.1, 0.2), c(-0.3, 0.0), c(1.0, 0.5), c(0.0, 0.7), c(0.2, -0.2)]);
        let t = 0.37;
        let n = 2000;
        let w = crate::linalg::simpson_weights(n, t / n as f64);
        let q: C64 = (0..=n).map(|j| f.eval(j as f64 * t / n as f64) * w[j]).sum();
        assert!((q - f.integral_from_zero(t)).norm() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = Potential::random(&mut rng, 3, 3, 1.0, PotentialType::General);
        let q = Potential::from_json_str(&p.to_json().to_string()).unwrap();
        assert_eq!(p.coeffs(), q.coeffs());
        let s = r#"{"singleexp":{"sigma":1,"omega":-6.283185307179586,"alpha":[0.4,2.75],"c":[0.1,0]}}"#;
        let q = Potential::from_json_str(s).unwrap();
        assert!(q.single_exp_params().is_some());
        assert!(Potential::from_json_str(r#"{"K":1,"coeffs":[[[0,0]]]}"#).is_err());
    }
}
