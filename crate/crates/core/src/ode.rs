//! Adaptive Dormand–Prince 8(5,3) for complex linear systems along straight
//! segments of the complex plane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Mat, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeTolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeTolerances {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, max_steps: 200_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
}

impl std::ops::AddAssign for OdeStats {
    fn add_assign(&mut self, o: Self) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.evals += o.evals;
    }
}

const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;

const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;

const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;

const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;

const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

// y + h Σ a_j k_j
fn stage(y: &[C64], h: f64, terms: &[(f64, &[C64])], out: &mut [C64]) {
    for i in 0..y.len() {
        let mut s = C64::new(0.0, 0.0);
        for (a, k) in terms {
            s += k[i] * *a;
        }
        out[i] = y[i] + s * h;
    }
}

fn rms_norm(v: &[C64], y: &[C64], tol: &OdeTolerances) -> f64 {
    let mut acc = 0.0;
    for i in 0..v.len() {
        let sk = tol.atol + tol.rtol * y[i].norm();
        acc += (v[i].norm() / sk).powi(2);
    }
    (acc / v.len() as f64).sqrt()
}

/// Integrate y' = f(s, y) for s from 0 to 1.
pub fn dop853<F>(f: F, y0: &[C64], tol: &OdeTolerances) -> Result<(Vec<C64>, OdeStats)>
where
    F: Fn(f64, &[C64], &mut [C64]),
{
    let n = y0.len();
    let mut stats = OdeStats::default();
    let mut y = y0.to_vec();
    let mut k1 = vec![C64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut k5 = k1.clone();
    let mut k6 = k1.clone();
    let mut k7 = k1.clone();
    let mut k8 = k1.clone();
    let mut k9 = k1.clone();
    let mut k10 = k1.clone();
    let mut yt = k1.clone();
    let mut y1 = k1.clone();

    f(0.0, &y, &mut k1);
    stats.evals += 1;

    // initial step as in Hairer's hinit
    let mut h = {
        let d0 = rms_norm(&y, &y, tol);
        let d1 = rms_norm(&k1, &y, tol);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(1.0);
        stage(&y, h0, &[(1.0, &k1)], &mut yt);
        f(h0, &yt, &mut k2);
        stats.evals += 1;
        let diff: Vec<C64> = k2.iter().zip(&k1).map(|(a, b)| a - b).collect();
        let d2 = rms_norm(&diff, &y, tol) / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(1.0 / 8.0) };
        (100.0 * h0).min(h1).min(1.0)
    };

    let (safe, facc1, facc2, expo1): (f64, f64, f64, f64) = (0.9, 1.0 / 0.333, 1.0 / 6.0, 1.0 / 8.0);
    let mut t = 0.0;
    let mut last_rejected = false;

    while t < 1.0 {
        if stats.accepted + stats.rejected >= tol.max_steps {
            return Err(Error::IntegratorFailure(format!("step limit reached at s = {t}")));
        }
        if h < 1e-14 {
            return Err(Error::IntegratorFailure(format!("step size underflow at s = {t}")));
        }
        let last = t + h >= 1.0 - 1e-14;
        if last {
            h = 1.0 - t;
        }

        stage(&y, h, &[(A21, &k1)], &mut yt);
        f(t + C2 * h, &yt, &mut k2);
        stage(&y, h, &[(A31, &k1), (A32, &k2)], &mut yt);
        f(t + C3 * h, &yt, &mut k3);
        stage(&y, h, &[(A41, &k1), (A43, &k3)], &mut yt);
        f(t + C4 * h, &yt, &mut k4);
        stage(&y, h, &[(A51, &k1), (A53, &k3), (A54, &k4)], &mut yt);
        f(t + C5 * h, &yt, &mut k5);
        stage(&y, h, &[(A61, &k1), (A64, &k4), (A65, &k5)], &mut yt);
        f(t + C6 * h, &yt, &mut k6);
        stage(&y, h, &[(A71, &k1), (A74, &k4), (A75, &k5), (A76, &k6)], &mut yt);
        f(t + C7 * h, &yt, &mut k7);
        stage(&y, h, &[(A81, &k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)], &mut yt);
        f(t + C8 * h, &yt, &mut k8);
        stage(&y, h, &[(A91, &k1), (A94, &k4), (A95, &k5), (A96, &k6), (A97, &k7), (A98, &k8)], &mut yt);
        f(t + C9 * h, &yt, &mut k9);
        stage(&y, h, &[(A101, &k1), (A104, &k4), (A105, &k5), (A106, &k6), (A107, &k7), (A108, &k8), (A109, &k9)], &mut yt);
        f(t + C10 * h, &yt, &mut k10);
        // k2 is reused for stage 11 and k3 for stage 12
        stage(
            &y,
            h,
            &[(A111, &k1), (A114, &k4), (A115, &k5), (A116, &k6), (A117, &k7), (A118, &k8), (A119, &k9), (A1110, &k10)],
            &mut yt,
        );
        f(t + C11 * h, &yt, &mut k2);
        stage(
            &y,
            h,
            &[(A121, &k1), (A124, &k4), (A125, &k5), (A126, &k6), (A127, &k7), (A128, &k8), (A129, &k9), (A1210, &k10), (A1211, &k2)],
            &mut yt,
        );
        f(t + h, &yt, &mut k3);
        stats.evals += 11;

        let mut err = 0.0;
        let mut err2 = 0.0;
        for i in 0..n {
            let incr = k1[i] * B1 + k6[i] * B6 + k7[i] * B7 + k8[i] * B8 + k9[i] * B9 + k10[i] * B10 + k2[i] * B11 + k3[i] * B12;
            y1[i] = y[i] + incr * h;
            let sk = tol.atol + tol.rtol * y[i].norm().max(y1[i].norm());
            let e2 = incr - k1[i] * BHH1 - k9[i] * BHH2 - k3[i] * BHH3;
            err2 += (e2.norm() / sk).powi(2);
            let e1 = k1[i] * ER1 + k6[i] * ER6 + k7[i] * ER7 + k8[i] * ER8 + k9[i] * ER9 + k10[i] * ER10 + k2[i] * ER11 + k3[i] * ER12;
            err += (e1.norm() / sk).powi(2);
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = h * err * (1.0 / (deno * n as f64)).sqrt();
        if !err.is_finite() {
            return Err(Error::IntegratorFailure("non-finite error estimate".into()));
        }

        let fac11 = err.powf(expo1);
        let fac = facc2.max(facc1.min(fac11 / safe));
        let mut h_new = h / fac;

        if err <= 1.0 {
            stats.accepted += 1;
            t = if last { 1.0 } else { t + h };
            std::mem::swap(&mut y, &mut y1);
            f(t, &y, &mut k1);
            stats.evals += 1;
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
        } else {
            h_new = h / facc1.min(fac11 / safe);
            stats.rejected += 1;
            last_rejected = true;
        }
        h = h_new.min(1.0);
    }
    Ok((y, stats))
}

/// Integrate Y' = rhs(z, Y) for an n×n matrix Y along the segment z0 → z1.
pub fn integrate_segment<F>(rhs: F, y0: &Mat, z0: C64, z1: C64, tol: &OdeTolerances) -> Result<(Mat, OdeStats)>
where
    F: Fn(C64, &Mat) -> Mat,
{
    let n = y0.nrows();
    let dz = z1 - z0;
    let flat: Vec<C64> = crate::linalg::vec_rm(y0).iter().copied().collect();
    let sys = |s: f64, y: &[C64], out: &mut [C64]| {
        let ym = Mat::from_row_slice(n, n, y);
        let d = rhs(z0 + dz * s, &ym) * dz;
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = d[(i, j)];
            }
        }
    };
    let (y, stats) = dop853(sys, &flat, tol)?;
    Ok((Mat::from_row_slice(n, n, &y), stats))
}

/// Integrate along a polyline through the given points.
pub fn integrate_path<F>(rhs: F, y0: &Mat, points: &[C64], tol: &OdeTolerances) -> Result<(Mat, OdeStats)>
where
    F: Fn(C64, &Mat) -> Mat,
{
    let mut y = y0.clone();
    let mut stats = OdeStats::default();
    for w in points.windows(2) {
        let (y1, s) = integrate_segment(&rhs, &y, w[0], w[1], tol)?;
        y = y1;
        stats += s;
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_along_complex_segment() {
        let a = Mat::from_row_slice(2, 2, &[C64::new(0.0, 1.0), C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.5, 0.0)]);
        let y0 = Mat::identity(2, 2);
        let (z0, z1) = (C64::new(0.0, 0.0), C64::new(1.0, 2.0));
        let (y, stats) = integrate_segment(|_z, y| &a * y, &y0, z0, z1, &OdeTolerances::default()).unwrap();
        let want = (a * z1).exp();
        assert!(crate::linalg::max_abs(&(y - want)) < 1e-11);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn scalar_power_law() {
        // y' = x y / z gives y = z^x along a path avoiding 0
        let x = C64::new(0.3, -0.2);
        let pts: Vec<C64> = (0..=8).map(|k| C64::from_polar(1.0, k as f64 * std::f64::consts::PI / 8.0)).collect();
        let y0 = Mat::from_element(1, 1, C64::new(1.0, 0.0));
        let (y, _) = integrate_path(|z, y| y * (x / z), &y0, &pts, &OdeTolerances::default()).unwrap();
        let want = (x * C64::new(0.0, std::f64::consts::PI)).exp();
        assert!((y[(0, 0)] - want).norm() < 1e-12);
    }
}
