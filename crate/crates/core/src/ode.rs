//! Adaptive explicit Runge-Kutta (Dormand-Prince 8(5,3)) for complex systems.

use crate::error::{Error, Result};
use crate::linalg::C64;

#[rustfmt::skip]
mod tableau {
    pub const A: [[f64; 12]; 12] = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [5.260_015_195_876_773E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.972_505_698_453_79E-2, 5.917_517_095_361_37E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [2.958_758_547_680_685E-2, 0.0, 8.876_275_643_042_054E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [2.413_651_341_592_667E-1, 0.0, -8.845_494_793_282_861E-1, 9.248_340_032_617_92E-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.703_703_703_703_703_5E-2, 0.0, 0.0, 1.708_286_087_294_738_6E-1, 1.254_676_875_668_224_2E-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.7109375E-2, 0.0, 0.0, 1.702_522_110_195_440_5E-1, 6.021_653_898_045_596E-2, -1.7578125E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.709_200_011_850_479E-2, 0.0, 0.0, 1.703_839_257_122_399_8E-1, 1.072_620_304_463_732_8E-1, -1.531_943_774_862_440_2E-2, 8.273_789_163_814_023E-3, 0.0, 0.0, 0.0, 0.0, 0.0],
        [6.241_109_587_160_757E-1, 0.0, 0.0, -3.360_892_629_446_941_4, -8.682_193_468_417_26E-1, 2.759_209_969_944_671E1, 2.015_406_755_047_789_4E1, -4.348_988_418_106_996E1, 0.0, 0.0, 0.0, 0.0],
        [4.776_625_364_382_643_4E-1, 0.0, 0.0, -2.488_114_619_971_667_7, -5.902_908_268_368_43E-1, 2.123_005_144_818_119_3E1, 1.527_923_363_288_242_3E1, -3.328_821_096_898_486E1, -2.033_120_170_850_862_7E-2, 0.0, 0.0, 0.0],
        [-9.371_424_300_859_873E-1, 0.0, 0.0, 5.186_372_428_844_064, 1.091_437_348_996_729_5, -8.149_787_010_746_927, -1.852_006_565_999_696E1, 2.273_948_709_935_050_5E1, 2.493_605_552_679_652_3, -3.046_764_471_898_219_6, 0.0, 0.0],
        [2.273_310_147_516_538, 0.0, 0.0, -1.053_449_546_673_725E1, -2.000_872_058_224_862_5, -1.795_893_186_311_88E1, 2.794_888_452_941_996E1, -2.858_998_277_135_023_5, -8.872_856_933_530_63, 1.236_056_717_579_430_3E1, 6.433_927_460_157_636E-1, 0.0],
    ];
    pub const C: [f64; 12] = [
        0.0, 5.260_015_195_876_773E-2, 7.890_022_793_815_16E-2, 1.183_503_419_072_274E-1, 2.816_496_580_927_726E-1, 3.333_333_333_333_333E-1, 0.25E+00, 3.076_923_076_923_077E-1, 6.512_820_512_820_513E-1, 0.6E+00, 8.571_428_571_428_571E-1, 1.0,
    ];
    pub const B: [f64; 12] = [
        5.429_373_411_656_876_5E-2, 0.0, 0.0, 0.0, 0.0, 4.450_312_892_752_409, 1.891_517_899_314_500_3, -5.801_203_960_010_585, 3.111_643_669_578_199E-1, -1.521_609_496_625_161E-1, 2.013_654_008_040_303_4E-1, 4.471_061_572_777_259E-2,
    ];
    pub const ER: [f64; 12] = [
        1.312_004_499_419_488E-2, 0.0, 0.0, 0.0, 0.0, -1.225_156_446_376_204_4, -4.957_589_496_572_502E-1, 1.664_377_182_454_986_4, -3.503_288_487_499_736_6E-1, 3.341_791_187_130_175E-1, 8.192_320_648_511_571E-2, -2.235_530_786_388_629_4E-2,
    ];
    pub const BHH: [f64; 3] = [
        2.440_944_881_889_764E-1, 7.338_466_882_816_118E-1, 2.205_882_352_941_176_6E-2,
    ];
}

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub h_init: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-12, atol: 1e-14, max_steps: 200_000, h_init: None }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions { rtol: tol, atol: tol * 1e-2, ..Default::default() }
    }
}

/// Integrates `y' = f(t, y)` from `t0` and returns the state at every time in
/// `t_out` (ascending, `>= t0`). Steps are clipped to land on the output times.
///
/// The error test is normwise: components are scaled by the largest entry of
/// the state rather than individually.
pub fn integrate<F>(mut f: F, t0: f64, y0: &[C64], t_out: &[f64], opts: &OdeOptions) -> Result<Vec<Vec<C64>>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    use tableau::*;
    let n = y0.len();
    let mut out = Vec::with_capacity(t_out.len());
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n]; 12];
    let mut ytmp = vec![C64::new(0.0, 0.0); n];
    let mut ynew = vec![C64::new(0.0, 0.0); n];
    let mut e5 = vec![C64::new(0.0, 0.0); n];
    let mut e3 = vec![C64::new(0.0, 0.0); n];
    let t_end = t_out.iter().cloned().fold(t0, f64::max);
    let span = (t_end - t0).abs().max(1e-300);
    let mut h = opts.h_init.unwrap_or(span / 64.0).min(span);
    let mut steps = 0usize;
    let mut fresh_k0 = false;
    let mut next = 0usize;
    while next < t_out.len() && t_out[next] <= t {
        out.push(y.clone());
        next += 1;
    }
    while next < t_out.len() {
        let target = t_out[next];
        if steps >= opts.max_steps {
            return Err(Error::NonConvergence { what: "ode integration (step budget)", residual: target - t });
        }
        let clipped = t + h >= target - 1e-14 * span;
        let hs = if clipped { target - t } else { h };
        if !fresh_k0 {
            let (head, _) = k.split_at_mut(1);
            f(t, &y, &mut head[0]);
            fresh_k0 = true;
        }
        for s in 1..12 {
            for i in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += kj[i] * a;
                    }
                }
                ytmp[i] = y[i] + acc * hs;
            }
            let (_, tail) = k.split_at_mut(s);
            f(t + C[s] * hs, &ytmp, &mut tail[0]);
        }
        let mut ymax = 0.0f64;
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            let mut er = C64::new(0.0, 0.0);
            for j in 0..12 {
                acc += k[j][i] * B[j];
                er += k[j][i] * ER[j];
            }
            e5[i] = er;
            e3[i] = acc - (k[0][i] * BHH[0] + k[8][i] * BHH[1] + k[11][i] * BHH[2]);
            ynew[i] = y[i] + acc * hs;
            ymax = ymax.max(y[i].norm()).max(ynew[i].norm());
        }
        let sc = opts.atol + opts.rtol * ymax;
        let (mut s5, mut s3) = (0.0, 0.0);
        for i in 0..n {
            s5 += (e5[i] / sc).norm_sqr();
            s3 += (e3[i] / sc).norm_sqr();
        }
        let deno = {
            let d = s5 + 0.01 * s3;
            if d <= 0.0 {
                1.0
            } else {
                d
            }
        };
        let err = hs.abs() * s5 / (deno * n as f64).sqrt();
        if !err.is_finite() || !ymax.is_finite() {
            if !ymax.is_finite() && hs < 1e-12 * span {
                return Err(Error::NonConvergence { what: "ode integration (overflow)", residual: f64::INFINITY });
            }
            h = hs * 0.25;
            steps += 1;
            continue;
        }
        let fac = (0.9 * err.max(1e-300).powf(-1.0 / 8.0)).clamp(0.333, 6.0);
        steps += 1;
        if err <= 1.0 {
            t = if clipped { target } else { t + hs };
            std::mem::swap(&mut y, &mut ynew);
            f(t, &y, &mut k[0]);
            fresh_k0 = true;
            while next < t_out.len() && t_out[next] <= t + 1e-14 * span {
                out.push(y.clone());
                next += 1;
            }
            h = if clipped { h.max(hs * fac) } else { hs * fac };
        } else {
            h = hs * fac.min(1.0);
            if h.abs() < 1e-14 * span {
                return Err(Error::NonConvergence { what: "ode integration (step underflow)", residual: err });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn oscillator_matches_exponential() {
        let w = c(0.3, 25.0);
        let ts: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let out = integrate(|_, y, dy| dy[0] = w * y[0], 0.0, &[c(1.0, 0.0)], &ts, &OdeOptions::default()).unwrap();
        for (t, y) in ts.iter().zip(&out) {
            let exact = (w * t).exp();
            assert!((y[0] - exact).norm() / exact.norm() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn time_dependent_rhs() {
        let out = integrate(
            |t, y, dy| dy[0] = c(0.0, 3.0 * t * t) * y[0],
            0.0,
            &[c(1.0, 0.0)],
            &[2.0],
            &OdeOptions::default(),
        )
        .unwrap();
        let exact = C64::from_polar(1.0, 8.0);
        assert!((out[0][0] - exact).norm() < 1e-10);
    }
}
