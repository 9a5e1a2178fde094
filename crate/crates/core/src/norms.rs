//! Discrete plain and weighted Hölder norms.
//!
//! Plain `C^{k,gamma}` norms add the sup terms and the seminorm:
//! `sum_{i<=k} sup|D^i u| + [D^k u]_gamma`. The weighted norms
//! `C^{(-m)}_{k,gamma}` take the largest weighted sup term instead:
//! `max_i sup|r^{m+i} D^i u| + sup r_1^{m+k+gamma} |D^k u(p) - D^k u(q)| / |p-q|^gamma`
//! with `r_1` the smaller of the two radii. Pair quotients only use pairs at
//! least `2h` apart.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::func::Smooth1d;
use crate::geometry::{BoundaryProfile, NORM_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormConvention {
    /// sup terms summed, plus seminorm
    Sum,
    /// largest (weighted) sup term, plus seminorm
    MaxPlusSeminorm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub k: usize,
    pub gamma: f64,
    pub m: f64,
    pub convention: NormConvention,
    pub value: f64,
    /// (weighted) sup of the i-th derivative for `i = 0..=k`
    pub sup_terms: Vec<f64>,
    pub seminorm: f64,
    /// point attaining each sup term
    pub sup_witness: Vec<[f64; 2]>,
    /// pair attaining the seminorm
    pub pair_witness: Option<[[f64; 2]; 2]>,
}

impl HolderReport {
    fn assemble(k: usize, gamma: f64, m: f64, sups: Vec<(f64, [f64; 2])>, pair: PairMax) -> Self {
        let convention = if m == 0.0 {
            NormConvention::Sum
        } else {
            NormConvention::MaxPlusSeminorm
        };
        let sup_terms: Vec<f64> = sups.iter().map(|s| s.0).collect();
        let head = match convention {
            NormConvention::Sum => sup_terms.iter().sum(),
            NormConvention::MaxPlusSeminorm => sup_terms.iter().copied().fold(0.0, f64::max),
        };
        Self {
            k,
            gamma,
            m,
            convention,
            value: head + pair.value,
            sup_terms,
            seminorm: pair.value,
            sup_witness: sups.iter().map(|s| s.1).collect(),
            pair_witness: pair.at,
        }
    }
}

/// Samples of a function of one variable on a uniform grid, with optional
/// exact derivatives. Missing derivatives come from second-order differences
/// (centered inside, one-sided at the ends).
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled1d {
    pub a: f64,
    pub b: f64,
    pub values: Vec<f64>,
    d1: Option<Vec<f64>>,
    d2: Option<Vec<f64>>,
}

impl Sampled1d {
    pub fn uniform(a: f64, b: f64, values: Vec<f64>) -> Self {
        assert!(
            values.len() >= 4 && b > a,
            "need at least 4 samples on a proper interval"
        );
        Self {
            a,
            b,
            values,
            d1: None,
            d2: None,
        }
    }

    /// `n + 1` value samples of `f` on `[a, b]`.
    pub fn from_fn(f: impl Fn(f64) -> f64, n: usize, a: f64, b: f64) -> Self {
        let h = (b - a) / n as f64;
        Self::uniform(a, b, (0..=n).map(|i| f(a + i as f64 * h)).collect())
    }

    /// `n + 1` samples of a smooth function, keeping its exact derivatives.
    pub fn from_smooth(f: &Smooth1d, n: usize, a: f64, b: f64) -> Self {
        let h = (b - a) / n as f64;
        let jets: Vec<[f64; 3]> = (0..=n).map(|i| f.jet(a + i as f64 * h)).collect();
        Self {
            a,
            b,
            values: jets.iter().map(|j| j[0]).collect(),
            d1: Some(jets.iter().map(|j| j[1]).collect()),
            d2: Some(jets.iter().map(|j| j[2]).collect()),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.len() - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.a + i as f64 * self.step()
    }

    /// The `order`-th derivative at every sample (`order <= 2`).
    pub fn derivative(&self, order: usize) -> Vec<f64> {
        match order {
            0 => self.values.clone(),
            1 => self
                .d1
                .clone()
                .unwrap_or_else(|| fd_d1(&self.values, self.step())),
            2 => self
                .d2
                .clone()
                .unwrap_or_else(|| fd_d2(&self.values, self.step())),
            _ => panic!("derivatives above order 2 are not supported"),
        }
    }
}

pub(crate) fn fd_d1(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    d
}

pub(crate) fn fd_d2(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let h2 = h * h;
    let mut d = vec![0.0; n];
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    }
    d
}

#[derive(Debug, Clone, Copy)]
struct PairMax {
    value: f64,
    at: Option<[[f64; 2]; 2]>,
}

/// Sup over pairs `p != q` with `|p - q| >= min_sep` of
/// `w(p, q) * max_c |v_c(p) - v_c(q)| / |p - q|^gamma`, where the weight is
/// `min(r_p, r_q)^weight_exp` (or 1 when `radii` is `None`).
fn pair_sup(
    pts: &[[f64; 2]],
    comps: &[&[f64]],
    gamma: f64,
    min_sep: f64,
    radii: Option<(&[f64], f64)>,
) -> PairMax {
    let n = pts.len();
    let best = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = (0.0f64, usize::MAX, usize::MAX);
            let pi = pts[i];
            for j in i + 1..n {
                let pj = pts[j];
                let d = (pi[0] - pj[0]).hypot(pi[1] - pj[1]);
                if d < min_sep {
                    continue;
                }
                let mut diff = 0.0f64;
                for c in comps {
                    diff = diff.max((c[i] - c[j]).abs());
                }
                let mut q = diff / d.powf(gamma);
                if let Some((r, e)) = radii {
                    q *= r[i].min(r[j]).powf(e);
                }
                if q > best.0 {
                    best = (q, i, j);
                }
            }
            best
        })
        .reduce(
            || (0.0, usize::MAX, usize::MAX),
            |a, b| {
                // ties resolve to the lexicographically first pair
                if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                    b
                } else {
                    a
                }
            },
        );
    PairMax {
        value: best.0,
        at: (best.1 != usize::MAX).then(|| [pts[best.1], pts[best.2]]),
    }
}

fn sup_abs(pts: &[[f64; 2]], comps: &[&[f64]], weight: impl Fn(usize) -> f64) -> (f64, [f64; 2]) {
    let mut best = (0.0f64, [f64::NAN; 2]);
    for i in 0..pts.len() {
        let w = weight(i);
        for c in comps {
            let v = (w * c[i]).abs();
            if v > best.0 {
                best = (v, pts[i]);
            }
        }
    }
    if best.1[0].is_nan() && !pts.is_empty() {
        best.1 = pts[0];
    }
    best
}

/// Plain `C^{k,gamma}` norm of sampled data, sum convention.
pub fn holder_norm_1d(s: &Sampled1d, k: usize, gamma: f64) -> HolderReport {
    let pts: Vec<[f64; 2]> = (0..s.len()).map(|i| [s.x(i), 0.0]).collect();
    let ders: Vec<Vec<f64>> = (0..=k).map(|i| s.derivative(i)).collect();
    let sups = ders.iter().map(|d| sup_abs(&pts, &[d], |_| 1.0)).collect();
    let pair = pair_sup(&pts, &[&ders[k]], gamma, 2.0 * s.step(), None);
    HolderReport::assemble(k, gamma, 0.0, sups, pair)
}

fn weighted_1d(
    s: &Sampled1d,
    k: usize,
    gamma: f64,
    m: f64,
    sup_exp: &[f64],
    pair_exp: f64,
) -> HolderReport {
    // the weight vanishes (or the data blows up) at x = 0: drop that sample
    let idx: Vec<usize> = (0..s.len()).filter(|&i| s.x(i) > 0.0).collect();
    let pts: Vec<[f64; 2]> = idx.iter().map(|&i| [s.x(i), 0.0]).collect();
    let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
    let ders: Vec<Vec<f64>> = (0..=k)
        .map(|o| {
            let d = s.derivative(o);
            idx.iter().map(|&i| d[i]).collect()
        })
        .collect();
    let sups = ders
        .iter()
        .zip(sup_exp)
        .map(|(d, &e)| sup_abs(&pts, &[d], |i| xs[i].powf(e)))
        .collect();
    let pair = pair_sup(
        &pts,
        &[&ders[k]],
        gamma,
        2.0 * s.step(),
        Some((&xs, pair_exp)),
    );
    let mut r = HolderReport::assemble(k, gamma, m, sups, pair);
    r.convention = NormConvention::MaxPlusSeminorm;
    r.value = r.sup_terms.iter().copied().fold(0.0, f64::max) + r.seminorm;
    r
}

/// Weighted norm `C^{(-m)}_{k,gamma}` on `[0, 1]` samples.
pub fn weighted_norm_1d(s: &Sampled1d, k: usize, gamma: f64, m: f64) -> HolderReport {
    let sup_exp: Vec<f64> = (0..=k).map(|i| m + i as f64).collect();
    weighted_1d(s, k, gamma, m, &sup_exp, m + k as f64 + gamma)
}

/// `C^{(1+gamma)}_{2,gamma}` norm of a profile together with both sides of the
/// embedding `sup|x^{1-gamma} f''| + |f|_{C^{1,gamma}} <= C |f|_{C^{(1+gamma)}_{2,gamma}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileWeightedReport {
    pub norm: HolderReport,
    pub sup_x_pow_f2: f64,
    pub c1_gamma: f64,
    /// left side of the embedding divided by `norm.value`
    pub embed_ratio: f64,
}

pub fn profile_weighted_norm(f: &BoundaryProfile, gamma: f64) -> ProfileWeightedReport {
    profile_weighted_norm_sampled(
        &Sampled1d::from_smooth(&f.as_smooth(), NORM_SAMPLES, 0.0, 1.0),
        gamma,
    )
}

pub fn profile_weighted_norm_sampled(s: &Sampled1d, gamma: f64) -> ProfileWeightedReport {
    let mut norm = weighted_1d(s, 2, gamma, 1.0, &[1.0, 1.0, 1.0], 1.0);
    norm.m = -(1.0 + gamma);
    let d2 = s.derivative(2);
    let sup_x_pow_f2 = (0..s.len())
        .map(|i| (s.x(i).powf(1.0 - gamma) * d2[i]).abs())
        .fold(0.0, f64::max);
    let c1_gamma = holder_norm_1d(s, 1, gamma).value;
    let embed_ratio = if norm.value > 0.0 {
        (sup_x_pow_f2 + c1_gamma) / norm.value
    } else {
        0.0
    };
    ProfileWeightedReport {
        norm,
        sup_x_pow_f2,
        c1_gamma,
        embed_ratio,
    }
}

/// `[f'' f]_gamma`, the quantity bounded by the product estimate for the corrector.
pub fn product_seminorm(f: &BoundaryProfile, gamma: f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let prod: Vec<f64> = (0..=n)
        .map(|i| {
            let [v, _, d2] = f.jet(i as f64 * h);
            v * d2
        })
        .collect();
    let pts: Vec<[f64; 2]> = (0..=n).map(|i| [i as f64 * h, 0.0]).collect();
    pair_sup(&pts, &[&prod], gamma, 2.0 * h, None).value
}

/// One node of a 2D field: value and (where available) physical derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub grad: Option<[f64; 2]>,
    pub hess: Option<[f64; 3]>,
}

/// Discrete plain (`m = 0`) or weighted 2D norm over samples whose `x` lies in
/// `region`. Radii are measured from the left corner `(0, 0)`. Samples missing
/// a derivative are skipped in the terms that need it.
pub fn holder_norm_field(
    samples: &[FieldSample],
    k: usize,
    gamma: f64,
    m: f64,
    region: (f64, f64),
    h: f64,
) -> HolderReport {
    assert!(k <= 2, "norms of order k >= 3 are not supported");
    let inside: Vec<&FieldSample> = samples
        .iter()
        .filter(|s| s.x >= region.0 - 1e-14 && s.x <= region.1 + 1e-14)
        .filter(|s| m == 0.0 || s.x.hypot(s.y) > 0.0)
        .collect();
    let order_ok = |s: &FieldSample, o: usize| match o {
        0 => true,
        1 => s.grad.is_some(),
        _ => s.hess.is_some(),
    };
    let comps_of = |s: &FieldSample, o: usize| -> Vec<f64> {
        match o {
            0 => vec![s.u],
            1 => s.grad.map(|g| g.to_vec()).unwrap_or_default(),
            _ => s.hess.map(|g| g.to_vec()).unwrap_or_default(),
        }
    };
    let mut sups = Vec::with_capacity(k + 1);
    let mut pair = PairMax {
        value: 0.0,
        at: None,
    };
    for o in 0..=k {
        let sel: Vec<&FieldSample> = inside.iter().copied().filter(|s| order_ok(s, o)).collect();
        let pts: Vec<[f64; 2]> = sel.iter().map(|s| [s.x, s.y]).collect();
        let r: Vec<f64> = pts.iter().map(|p| p[0].hypot(p[1])).collect();
        let ncomp = [1, 2, 3][o];
        let cols: Vec<Vec<f64>> = (0..ncomp)
            .map(|c| sel.iter().map(|s| comps_of(s, o)[c]).collect())
            .collect();
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        let e = m + o as f64;
        let sup = if m == 0.0 {
            sup_abs(&pts, &refs, |_| 1.0)
        } else {
            sup_abs(&pts, &refs, |i| r[i].powf(e))
        };
        sups.push(sup);
        if o == k {
            let radii = (m != 0.0).then_some((r.as_slice(), m + k as f64 + gamma));
            pair = pair_sup(&pts, &refs, gamma, 2.0 * h, radii);
        }
    }
    HolderReport::assemble(k, gamma, m, sups, pair)
}
