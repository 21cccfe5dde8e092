//! Numerical integration: adaptive Gauss–Kronrod (10/21) on finite and
//! semi-infinite intervals, and fixed-order Gauss–Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result, Scalar};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_640_369,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Integral value with its error estimate and the number of integrand calls.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
    pub max_intervals: usize,
}

impl<T: Scalar> Tolerance<T> {
    pub fn new(abs: T, rel: T) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 4000,
        }
    }
}

fn gk21<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[10]);
    let mut gauss = T::zero();
    for j in 0..10 {
        let dx = radius * T::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * pair;
        }
    }
    let value = kronrod * radius;
    let error = ((kronrod - gauss) * radius).abs();
    (value, error)
}

struct Piece<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Scalar> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Scalar> Eq for Piece<T> {}
impl<T: Scalar> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`, bisecting the
/// interval with the largest error estimate until the total estimate is
/// below `max(abs, rel·|I|)`.
pub fn integrate<T: Scalar, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    tol: Tolerance<T>,
) -> Result<QuadResult<T>> {
    if a == b {
        return Ok(QuadResult {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        });
    }
    let (value, error) = gk21(&f, a, b);
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    // Floor on achievable accuracy: a few ulps of the magnitude.
    let eps = T::epsilon() * T::lit(50.0);
    loop {
        let target = tol.abs.max(tol.rel * total.abs());
        if total_err <= target || total_err <= eps * total.abs() {
            break;
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Quadrature(format!(
                "{} intervals used, estimate {:?} with error {:?} (target {:?})",
                heap.len(),
                total,
                total_err,
                target
            )));
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = T::lit(0.5) * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in this precision.
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        evaluations += 42;
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed drift from incremental updates.
    let (value, error) = heap.iter().fold((T::zero(), T::zero()), |(v, e), p| {
        (v + p.value, e + p.error)
    });
    if !value.is_finite() {
        return Err(Error::Quadrature("non-finite integral".into()));
    }
    Ok(QuadResult {
        value,
        error,
        evaluations,
    })
}

/// Integral over `[a, ∞)` via the map `t = a + u/(1-u)`.
pub fn integrate_to_infinity<T: Scalar, F: Fn(T) -> T>(
    f: F,
    a: T,
    tol: Tolerance<T>,
) -> Result<QuadResult<T>> {
    let one = T::one();
    let g = |u: T| {
        if u >= one {
            return T::zero();
        }
        let w = one - u;
        let val = f(a + u / w) / (w * w);
        if val.is_finite() {
            val
        } else {
            T::zero()
        }
    };
    integrate(g, T::zero(), one, tol)
}

/// Integral over the whole real line, split at `split`.
pub fn integrate_real_line<T: Scalar, F: Fn(T) -> T>(
    f: F,
    split: T,
    tol: Tolerance<T>,
) -> Result<QuadResult<T>> {
    let right = integrate_to_infinity(&f, split, tol)?;
    let left = integrate_to_infinity(|s: T| f(split - (s - split)), split, tol)?;
    Ok(QuadResult {
        value: left.value + right.value,
        error: left.error + right.error,
        evaluations: left.evaluations + right.evaluations,
    })
}

/// Fixed-order Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre polynomial `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(c + r * x);
        }
        sum * r
    }

    /// Nodes mapped to `[a, b]` together with scaled weights.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + r * x, w * r))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_polynomial_and_gaussian() {
        let tol = Tolerance::new(1e-13, 1e-13);
        let r = integrate(|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, tol).unwrap();
        assert!((r.value - 0.0).abs() < 1e-13);
        let r = integrate_real_line(|x: f64| (-x * x / 2.0).exp(), 0.0, tol).unwrap();
        assert!((r.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite_exponential() {
        let tol = Tolerance::new(1e-14, 1e-13);
        let r = integrate_to_infinity(|x: f64| (-x).exp(), 1.0, tol).unwrap();
        assert!((r.value - (-1.0f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn single_precision_works() {
        let tol = Tolerance::new(1e-5f32, 1e-5);
        let r = integrate(|x: f32| x.sin(), 0.0, std::f32::consts::PI, tol).unwrap();
        assert!((r.value - 2.0).abs() < 1e-5);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let mut tol = Tolerance::new(1e-15, 0.0);
        tol.max_intervals = 3;
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, tol).unwrap_err();
        assert!(matches!(err, Error::Quadrature(_)));
    }

    #[test]
    fn gauss_legendre_exact_to_degree() {
        for n in [1usize, 2, 5, 10, 20] {
            let gl = GaussLegendre::new(n);
            let deg = 2 * n - 1;
            let exact = 1.0 / (deg as f64 + 1.0) * (1.0 - (-1.0f64).powi(deg as i32 + 1));
            let got = gl.integrate(|x| x.powi(deg as i32), -1.0, 1.0);
            assert!((got - exact).abs() < 1e-13, "n={n}: {got} vs {exact}");
            let w: f64 = gl.weights.iter().sum();
            assert!((w - 2.0).abs() < 1e-13);
        }
    }
}
