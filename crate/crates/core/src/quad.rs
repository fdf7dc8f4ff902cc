//! Gauss–Legendre helpers used by the quadratures in this crate.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

/// Nodes and weights on [-1, 1].
pub type Rule = Arc<Vec<(f64, f64)>>;

/// Cached Gauss–Legendre rule of the given order.
pub fn gauss_legendre(order: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("quadrature cache poisoned");
    map.entry(order)
        .or_insert_with(|| {
            let n = NonZeroUsize::new(order.max(1)).expect("order is non-zero");
            let mut pairs = GaussLegendre::new(n).as_node_weight_pairs().to_vec();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(pairs)
        })
        .clone()
}

/// Fixed-order rule on [a, b].
pub fn fixed<F: FnMut(f64) -> Complex64>(rule: &[(f64, f64)], a: f64, b: f64, mut f: F) -> Complex64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut acc = Complex64::new(0.0, 0.0);
    for &(x, w) in rule {
        acc += f(mid + half * x) * w;
    }
    acc * half
}

/// Globally adaptive 15-point Gauss–Legendre quadrature. The panel with
/// the largest error estimate is bisected until the summed estimate drops
/// below `tol` (absolute), below 1e-13 of the result, or until 4000 panels
/// have been created.
pub fn adaptive<F: FnMut(f64) -> Complex64>(a: f64, b: f64, tol: f64, f: &mut F) -> Complex64 {
    struct Panel {
        a: f64,
        b: f64,
        value: Complex64,
        err: f64,
    }
    impl PartialEq for Panel {
        fn eq(&self, o: &Self) -> bool {
            self.err == o.err
        }
    }
    impl Eq for Panel {}
    impl PartialOrd for Panel {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Panel {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            self.err.total_cmp(&o.err)
        }
    }

    let rule = gauss_legendre(15);
    let split = |a: f64, b: f64, parent: Complex64, f: &mut F| {
        let m = 0.5 * (a + b);
        let l = fixed(&rule, a, m, &mut *f);
        let r = fixed(&rule, m, b, &mut *f);
        let err = (l + r - parent).norm();
        (Panel { a, b: m, value: l, err: 0.5 * err }, Panel { a: m, b, value: r, err: 0.5 * err })
    };
    let whole = fixed(&rule, a, b, &mut *f);
    let (l, r) = split(a, b, whole, f);
    let mut total = l.value + r.value;
    let mut err_sum = l.err + r.err;
    let mut heap = std::collections::BinaryHeap::from(vec![l, r]);
    let mut panels = 2;
    while err_sum > tol.max(1e-13 * total.norm()) && panels < 4000 {
        let worst = heap.pop().expect("heap is never empty");
        if worst.b - worst.a <= 1e-15 * (b - a).abs() {
            heap.push(worst);
            break;
        }
        let (l, r) = split(worst.a, worst.b, worst.value, f);
        total += l.value + r.value - worst.value;
        err_sum += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
        panels += 1;
    }
    // Re-sum to shed the drift of the running total.
    heap.iter().map(|p| p.value).sum()
}

/// Adaptive integration over consecutive breakpoints.
pub fn adaptive_breaks<F: FnMut(f64) -> Complex64>(breaks: &[f64], tol: f64, f: &mut F) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            acc += adaptive(w[0], w[1], tol, f);
        }
    }
    acc
}

/// Real-valued convenience wrapper over [`adaptive`].
pub fn adaptive_real<F: FnMut(f64) -> f64>(a: f64, b: f64, tol: f64, mut f: F) -> f64 {
    adaptive(a, b, tol, &mut |x| Complex64::new(f(x), 0.0)).re
}
