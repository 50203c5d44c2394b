//! Globally adaptive Gauss–Kronrod (7/15) quadrature in one and two
//! dimensions. Used by the numeric bivariate-CDF path and by test oracles.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Panel {
        a,
        b,
        value: kron * h,
        err: ((kron - gauss) * h).abs(),
    }
}

/// Integrate `f` over `[a, b]` until the summed panel error is below
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_evals: usize,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_err: 0.0,
            evals: 0,
        });
    }
    let first = gk15(&mut f, a, b);
    let mut evals = 15;
    let mut value = first.value;
    let mut err = first.err;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    while err > abs_tol.max(rel_tol * value.abs()) {
        if !value.is_finite() {
            return Err(Error::NotDefined("non-finite integrand".into()));
        }
        if evals + 30 > max_evals {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                terms: evals,
            });
        }
        let worst = heap.pop().expect("heap holds every live panel");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(&mut f, worst.a, mid);
        let right = gk15(&mut f, mid, worst.b);
        evals += 30;
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        // re-sum now and then so the running totals do not drift
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.err).sum();
        }
    }
    Ok(QuadResult {
        value: heap.iter().map(|p| p.value).sum(),
        abs_err: err,
        evals,
    })
}

/// Iterated integral of `f(x, y)` over the rectangle `[ax, bx] × [ay, by]`.
pub fn integrate_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    (ax, bx): (f64, f64),
    (ay, by): (f64, f64),
    abs_tol: f64,
    rel_tol: f64,
    max_evals: usize,
) -> Result<QuadResult> {
    let inner_fail: Cell<Option<Error>> = Cell::new(None);
    let total = Cell::new(0usize);
    let width = (bx - ax).abs().max(f64::MIN_POSITIVE);
    let inner_abs = 0.1 * abs_tol / width;
    let outer = integrate(
        |x| {
            let r = integrate(|y| f(x, y), ay, by, inner_abs, 0.1 * rel_tol, max_evals);
            match r {
                Ok(q) => {
                    total.set(total.get() + q.evals);
                    q.value
                }
                Err(e) => {
                    inner_fail.set(Some(e));
                    0.0
                }
            }
        },
        ax,
        bx,
        abs_tol,
        rel_tol,
        max_evals,
    )?;
    if let Some(e) = inner_fail.take() {
        return Err(e);
    }
    Ok(QuadResult {
        value: outer.value,
        abs_err: outer.abs_err,
        evals: total.get(),
    })
}
