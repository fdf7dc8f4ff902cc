//! Integral-equation kernel K(z, s) and its collocation matrix.
//!
//! K is the field radiated along the tube surface by a unit current element,
//! filtered through the nonlocal Green function g. Two regularised forms are
//! provided. The singular form moves both s-derivatives of the Helmholtz
//! kernel onto G and resolves the remaining Cauchy singularity as a principal
//! value. The spectral form writes G as a Hankel–Bessel integral and uses the
//! Fourier image of g.
//!
//! Matrix entries are segment integrals ∫_{seg j} K(z_i, s) ds, so the
//! logarithmic singularity at s = z never has to be sampled.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NanoError, Result};
use crate::green_functions::{
    big_g_antiderivative, big_g_derivative, big_g_direct_surface, check_resonance, g_closed_unchecked,
    sin_ratio, spectral_nodes, tail_cos1, tail_cos3, tail_sin2, GreenParams,
};
use crate::quad;
use crate::special::h0j0;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Uniform collocation grid of `n` segments on [−L, L].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_segments: usize,
    pub half_length: f64,
    /// Segment length Δ = 2L/n.
    pub delta: f64,
    /// Segment midpoints, the collocation points.
    pub midpoints: Vec<f64>,
}

impl Grid {
    /// Build a grid; at least 11 segments are required.
    pub fn uniform(n_segments: usize, half_length: f64) -> Result<Self> {
        if n_segments < 11 {
            return Err(NanoError::InvalidParameter("n_segments must be >= 11".into()));
        }
        if !(half_length > 0.0) {
            return Err(NanoError::InvalidParameter("half_length must be positive".into()));
        }
        let delta = 2.0 * half_length / n_segments as f64;
        let midpoints = (0..n_segments)
            .map(|i| -half_length + (i as f64 + 0.5) * delta)
            .collect();
        Ok(Grid {
            n_segments,
            half_length,
            delta,
            midpoints,
        })
    }
}

/// Regularised kernel representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelForm {
    #[default]
    Singular,
    Spectral,
}

/// Dense collocation matrix of the kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub n_segments: usize,
    pub grid_midpoints: Vec<f64>,
    /// Entry (i, j) is ∫_{seg j} K(z_i, s) ds.
    pub values: DMatrix<Complex64>,
    pub form_tag: KernelForm,
    /// Angular frequency the matrix was built for, rad/s.
    pub frequency: f64,
}

impl KernelMatrix {
    /// Largest |entry|.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// CSV dump: `i,j,re,im` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,re,im\n");
        let n = self.n_segments;
        for i in 0..n {
            for j in 0..n {
                let v = self.values[(i, j)];
                out.push_str(&format!("{i},{j},{:e},{:e}\n", v.re, v.im));
            }
        }
        out
    }
}

/// Resolution knobs for the singular-form assembly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssemblyOptions {
    /// Gauss–Legendre order on each half segment.
    pub half_segment_order: usize,
    /// Maximum number of sub-panels per half segment used to resolve a
    /// sharply peaked g.
    pub max_sub_panels: usize,
    /// Above this value of |α̃|Δ/2 the Green function is replaced by its
    /// local limit −δ/α̃².
    pub local_switch: f64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            half_segment_order: 8,
            max_sub_panels: 8,
            local_switch: 32.0,
        }
    }
}

/// Build the kernel matrix on `grid` in the requested form.
pub fn assemble(grid: &Grid, params: &GreenParams, form: KernelForm, omega: f64) -> Result<KernelMatrix> {
    assemble_with(grid, params, form, omega, &AssemblyOptions::default())
}

/// [`assemble`] with explicit resolution options.
pub fn assemble_with(
    grid: &Grid,
    params: &GreenParams,
    form: KernelForm,
    omega: f64,
    opts: &AssemblyOptions,
) -> Result<KernelMatrix> {
    params.validate()?;
    if (grid.half_length - params.half_length).abs() > 1e-12 * params.half_length {
        return Err(NanoError::InvalidParameter("grid and Green parameters disagree on L".into()));
    }
    check_resonance(params.alpha_tilde, params.half_length).map_err(|e| with_omega(e, omega))?;
    let values = match form {
        KernelForm::Singular => assemble_singular(grid, params, opts),
        KernelForm::Spectral => assemble_spectral(grid, params)?,
    };
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(NanoError::Regularization("non-finite kernel entry".into()));
    }
    Ok(KernelMatrix {
        n_segments: grid.n_segments,
        grid_midpoints: grid.midpoints.clone(),
        values,
        form_tag: form,
        frequency: omega,
    })
}

fn with_omega(e: NanoError, omega: f64) -> NanoError {
    match e {
        NanoError::InternalResonance { alpha_l, .. } => NanoError::InternalResonance { omega, alpha_l },
        other => other,
    }
}

/// Offsets t_q ∈ (−Δ/2, Δ/2) and weights of the in-segment quadrature.
/// The node set is mirror-symmetric on each half segment, so across every
/// segment boundary nodes come in reflected pairs and the Cauchy part of
/// G′ cancels pairwise.
fn segment_nodes(delta: f64, order: usize, sub: usize) -> Vec<(f64, f64)> {
    let rule = quad::gauss_legendre(order);
    let half = 0.5 * delta;
    let w_sub = half / sub as f64;
    let mut out = Vec::with_capacity(2 * order * sub);
    for side in [-1.0, 1.0] {
        for p in 0..sub {
            let a = p as f64 * w_sub;
            for &(x, w) in rule.iter() {
                let t = a + 0.5 * w_sub * (x + 1.0);
                out.push((side * t, 0.5 * w_sub * w));
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Values of P (antiderivative of G) and G′ at a set of positive abscissae.
/// Points are processed in increasing order and P is accumulated segment by
/// segment, which keeps the cost per point to a handful of G evaluations.
fn p_and_gprime(points: &[f64], params: &GreenParams) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
    let mut p_out = vec![Complex64::new(0.0, 0.0); points.len()];
    let mut d_out = vec![Complex64::new(0.0, 0.0); points.len()];
    let near = 4.0 * params.radius;
    let rule = quad::gauss_legendre(6);
    let mut last_x = 0.0;
    let mut last_p = Complex64::new(0.0, 0.0);
    for &i in &idx {
        let x = points[i];
        let p = if x <= near || last_x <= near {
            big_g_antiderivative(x, params)
        } else if x == last_x {
            last_p
        } else {
            last_p + quad::fixed(&rule, last_x, x, |t| big_g_direct_surface(t, params))
        };
        p_out[i] = p;
        d_out[i] = big_g_derivative(x, params, 1).expect("positive abscissa");
        last_x = x;
        last_p = p;
    }
    (p_out, d_out)
}

/// φ(x) = k²[P(x + Δ/2) − P(x − Δ/2)] + G′(x + Δ/2) − G′(x − Δ/2): the
/// segment-integrated (k² + ∂²_s) G evaluated at separations
/// x_{n,q} = nΔ − t_q for n = −(N−1)..(N−1).
struct PhiTable {
    n: usize,
    nq: usize,
    /// Row-major [n + N − 1][q].
    values: Vec<Complex64>,
}

impl PhiTable {
    fn build(n: usize, delta: f64, nodes: &[(f64, f64)], params: &GreenParams) -> Self {
        let nq = nodes.len();
        // Abscissae y = (m + ½)Δ − t_q, m = −N..N−1, cover every x ± Δ/2.
        let n_y = 2 * n;
        let mut ys = Vec::with_capacity(n_y * nq);
        for m in 0..n_y {
            let mm = m as f64 - n as f64;
            for &(t, _) in nodes {
                ys.push((mm + 0.5) * delta - t);
            }
        }
        let abs_y: Vec<f64> = ys.iter().map(|y| y.abs()).collect();
        let (p_abs, d_abs) = p_and_gprime(&abs_y, params);
        // P and G′ are odd in their argument.
        let p: Vec<Complex64> = ys.iter().zip(&p_abs).map(|(y, v)| v * y.signum()).collect();
        let d: Vec<Complex64> = ys.iter().zip(&d_abs).map(|(y, v)| v * y.signum()).collect();
        let k2 = params.k_free * params.k_free;
        let mut values = vec![Complex64::new(0.0, 0.0); (2 * n - 1) * nq];
        for nn in 0..(2 * n - 1) {
            // x + Δ/2 uses m = n_idx + 1 − N + N = nn + 1 in y indexing
            // (y_m = (m − N + ½)Δ − t), x − Δ/2 uses m = nn.
            for q in 0..nq {
                let up = (nn + 1) * nq + q;
                let lo = nn * nq + q;
                values[nn * nq + q] = (p[up] - p[lo]) * k2 + d[up] - d[lo];
            }
        }
        PhiTable { n, nq, values }
    }

    #[inline]
    fn get(&self, offset: isize, q: usize) -> Complex64 {
        self.values[((offset + self.n as isize - 1) as usize) * self.nq + q]
    }
}

/// Singular-form assembly in O(N²) operations.
///
/// The closed Green function is a sum of four exponentials in z and z′.
/// Three of them factor into products of bounded functions of z and z′,
/// and the direct term e^{iα̃|z − z′|} is accumulated by a forward and a
/// backward recursion with the contracting factor e^{iα̃Δ}.
fn assemble_singular(grid: &Grid, params: &GreenParams, opts: &AssemblyOptions) -> DMatrix<Complex64> {
    let n = grid.n_segments;
    let delta = grid.delta;
    let l = grid.half_length;
    let a = params.alpha_tilde;
    let s = &grid.midpoints;

    if a.norm() * delta * 0.5 > opts.local_switch {
        // g → −δ/α̃²: entries reduce to −φ(s_j − z_i)/α̃².
        let nodes = vec![(0.0, 1.0)];
        let phi = PhiTable::build(n, delta, &nodes, params);
        let inv = -1.0 / (a * a);
        return DMatrix::from_fn(n, n, |i, j| phi.get(j as isize - i as isize, 0) * inv);
    }

    let sub = ((a.norm() * delta / 8.0).ceil() as usize).clamp(1, opts.max_sub_panels);
    let nodes = segment_nodes(delta, opts.half_segment_order, sub);
    let phi = PhiTable::build(n, delta, &nodes, params);
    let e = |t: f64| (I * a * t).exp();

    // Ψ±(off) = Σ_q w_q e^{±iα̃t_q} φ_q(off), with partial sums over t_q < 0
    // and t_q > 0 for the segment that contains the collocation point.
    let n_off = 2 * n - 1;
    let mut psi_p = vec![Complex64::new(0.0, 0.0); n_off];
    let mut psi_m = vec![Complex64::new(0.0, 0.0); n_off];
    let mut psi_p_neg = vec![Complex64::new(0.0, 0.0); n_off];
    let mut psi_m_neg = vec![Complex64::new(0.0, 0.0); n_off];
    let mut psi_p_pos = vec![Complex64::new(0.0, 0.0); n_off];
    let mut psi_m_pos = vec![Complex64::new(0.0, 0.0); n_off];
    let ep: Vec<Complex64> = nodes.iter().map(|&(t, w)| e(t) * w).collect();
    let em: Vec<Complex64> = nodes.iter().map(|&(t, w)| e(-t) * w).collect();
    for off in 0..n_off {
        for (q, &(t, _)) in nodes.iter().enumerate() {
            let v = phi.values[off * phi.nq + q];
            let vp = v * ep[q];
            let vm = v * em[q];
            psi_p[off] += vp;
            psi_m[off] += vm;
            if t < 0.0 {
                psi_p_neg[off] += vp;
                psi_m_neg[off] += vm;
            } else {
                psi_p_pos[off] += vp;
                psi_m_pos[off] += vm;
            }
        }
    }
    let at = |v: &Vec<Complex64>, off: isize| v[(off + n as isize - 1) as usize];

    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let step = e(delta);

    // Direct term, z′ < z_i: C_{i+1}(j) = e^{iα̃Δ}(C_i(j) + Ψ−(j − i)).
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..n {
            let off = j as isize - i as isize;
            m[(i, j)] += c[j] + at(&psi_m_neg, off);
        }
        for j in 0..n {
            let off = j as isize - i as isize;
            c[j] = step * (c[j] + at(&psi_m, off));
        }
    }
    // Direct term, z′ > z_i: D_{i−1}(j) = e^{iα̃Δ}(D_i(j) + Ψ+(j − i)).
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        for j in 0..n {
            let off = j as isize - i as isize;
            m[(i, j)] += d[j] + at(&psi_p_pos, off);
        }
        for j in 0..n {
            let off = j as isize - i as isize;
            d[j] = step * (d[j] + at(&psi_p, off));
        }
    }
    // Image terms E(z + z′ + 2L) and E(2L − z − z′): rank one in (z, z′).
    let mut s2 = vec![Complex64::new(0.0, 0.0); n];
    let mut s3 = vec![Complex64::new(0.0, 0.0); n];
    for mm in 0..n {
        let f2 = e(s[mm] + l);
        let f3 = e(l - s[mm]);
        for j in 0..n {
            let off = j as isize - mm as isize;
            s2[j] += f2 * at(&psi_p, off);
            s3[j] += f3 * at(&psi_m, off);
        }
    }
    for i in 0..n {
        let u2 = e(s[i] + l);
        let u3 = e(l - s[i]);
        for j in 0..n {
            m[(i, j)] -= u2 * s2[j] + u3 * s3[j];
        }
    }
    // Term E(4L − |z − z′|) = e^{iα̃(2L − z)}e^{iα̃(2L + z′)} for z′ < z and
    // e^{iα̃(2L + z)}e^{iα̃(2L − z′)} for z′ > z; prefix sums over segments.
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let outer = e(2.0 * l - s[i]);
        let inner = e(2.0 * l + s[i]);
        for j in 0..n {
            let off = j as isize - i as isize;
            m[(i, j)] += outer * (u[j] + inner * at(&psi_p_neg, off));
        }
        for j in 0..n {
            let off = j as isize - i as isize;
            u[j] += inner * at(&psi_p, off);
        }
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let outer = e(2.0 * l + s[i]);
        let inner = e(2.0 * l - s[i]);
        for j in 0..n {
            let off = j as isize - i as isize;
            m[(i, j)] += outer * (v[j] + inner * at(&psi_m_pos, off));
        }
        for j in 0..n {
            let off = j as isize - i as isize;
            v[j] += inner * at(&psi_m, off);
        }
    }
    let pref = I / (2.0 * a) / (1.0 - e(4.0 * l));
    m *= pref;
    m
}

/// Weight (k² − h²)H₀⁽¹⁾(κR)J₀(κR)/(α̃² − h²) of the spectral kernel.
fn spectral_weight(h: f64, params: &GreenParams) -> Complex64 {
    let k = params.k_free;
    let a2 = params.alpha_tilde * params.alpha_tilde;
    h0j0(k, h, params.radius, params.radius) * (k * k - h * h) / (a2 - h * h)
}

/// Large-h expansion W ≈ c₁/h + c₃/h³ of [`spectral_weight`].
fn spectral_tail_coeffs(params: &GreenParams) -> (Complex64, Complex64) {
    let r = params.radius;
    let k = params.k_free;
    let a2 = params.alpha_tilde * params.alpha_tilde;
    let c1 = -I / (PI * r);
    let c3 = c1 * (a2 - 0.5 * k * k + 1.0 / (8.0 * r * r));
    (c1, c3)
}

fn spectral_h_max(params: &GreenParams) -> f64 {
    params
        .spectral_h_max
        .unwrap_or(40.0 / params.radius)
        .max(40.0 * params.alpha_tilde.norm())
}

/// Breakpoints that bracket the near-real pole of 1/(α̃² − h²).
fn pole_breaks(params: &GreenParams) -> Vec<f64> {
    let a = params.alpha_tilde;
    let (re, im) = (a.re.abs(), a.im.abs().max(1e-300));
    let mut out = vec![re];
    for f in [0.3, 1.0, 3.0, 10.0, 30.0] {
        out.push(re - f * im);
        out.push(re + f * im);
    }
    out.retain(|x| *x > 0.0);
    out
}

/// Q(u) = ∫ e^{ihu} W(h) dh with W the spectral kernel weight.
fn spectral_q(u: f64, params: &GreenParams) -> Result<Complex64> {
    if u == 0.0 {
        return Err(NanoError::SingularPoint("spectral kernel is log-singular at s = z".into()));
    }
    let h_max = spectral_h_max(params);
    let nodes = spectral_nodes(params.k_free, h_max, u.abs(), &pole_breaks(params));
    let mut acc = Complex64::new(0.0, 0.0);
    for &(h, w) in &nodes {
        acc += spectral_weight(h, params) * ((h * u).cos() * w);
    }
    let (c1, c3) = spectral_tail_coeffs(params);
    acc += c1 * tail_cos1(h_max, u) + c3 * tail_cos3(h_max, u);
    Ok(acc * 2.0)
}

/// Pointwise spectral kernel
/// K = −iπR·[Q(s − z) + r(z − L)·Q(s + L) − r(z + L)·Q(s − L)], r(x) = sin α̃x / sin 2α̃L.
pub fn kernel_spectral(z: f64, s: f64, params: &GreenParams) -> Result<Complex64> {
    let l = params.half_length;
    check_resonance(params.alpha_tilde, l)?;
    let a = params.alpha_tilde;
    let rm = sin_ratio(a, z - l, l);
    let rp = sin_ratio(a, z + l, l);
    let mut acc = spectral_q(s - z, params)?;
    if rm.norm() > 0.0 {
        acc += rm * spectral_q(s + l, params)?;
    }
    if rp.norm() > 0.0 {
        acc -= rp * spectral_q(s - l, params)?;
    }
    Ok(acc * (-I * PI * params.radius))
}

fn assemble_spectral(grid: &Grid, params: &GreenParams) -> Result<DMatrix<Complex64>> {
    let n = grid.n_segments;
    let delta = grid.delta;
    let l = grid.half_length;
    let a = params.alpha_tilde;
    let h_max = spectral_h_max(params);
    let half = 0.5 * delta;
    let n_u = 4 * n + 1;
    let u_max = 2.0 * l + delta;
    let nodes = spectral_nodes(params.k_free, h_max, u_max, &pole_breaks(params));
    // Segment-averaged weight W(h)·Δ·sinc(hΔ/2) = W·2 sin(hΔ/2)/h.
    let weights: Vec<(f64, Complex64)> = nodes
        .iter()
        .map(|&(h, w)| {
            let sinc = if h == 0.0 { delta } else { 2.0 * (h * half).sin() / h };
            (h, spectral_weight(h, params) * (sinc * w))
        })
        .collect();
    let (c1, _) = spectral_tail_coeffs(params);
    // Q̄ at u = mΔ/2, m = 0..4N; Q̄ is even in u.
    let qbar: Vec<Complex64> = (0..n_u)
        .map(|mi| {
            let u = mi as f64 * half;
            let mut acc = Complex64::new(0.0, 0.0);
            for &(h, w) in &weights {
                acc += w * (h * u).cos();
            }
            acc += c1 * (tail_sin2(h_max, u + half) - tail_sin2(h_max, u - half));
            acc * 2.0
        })
        .collect();
    let q_at = |u: f64| -> Complex64 {
        let mi = (u.abs() / half).round() as usize;
        qbar[mi]
    };
    let s = &grid.midpoints;
    let pref = -I * PI * params.radius;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let z = s[i];
        let sj = s[j];
        let rm = sin_ratio(a, z - l, l);
        let rp = sin_ratio(a, z + l, l);
        (q_at(sj - z) + rm * q_at(sj + l) - rp * q_at(sj - l)) * pref
    }))
}

/// Options for the pointwise singular kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointwiseOptions {
    /// Initial principal-value exclusion radius, m.
    pub exclusion: f64,
    /// Number of halvings used in the Richardson table.
    pub levels: usize,
    /// Relative tolerance for the adaptive quadratures.
    pub rel_tol: f64,
}

impl Default for PointwiseOptions {
    fn default() -> Self {
        PointwiseOptions {
            exclusion: 0.0,
            levels: 4,
            rel_tol: 1e-9,
        }
    }
}

/// Pointwise singular-form kernel F₁ − F₂ + F₃ with
/// F₁ = k²∫g(z, z′)G(s − z′)dz′,
/// F₂ = g(z, s)·∂_s[G(s − L) − G(s + L)],
/// F₃ = PV∫[g(z, z′) − g(z, s)]·∂²_s G(s − z′)dz′.
pub fn kernel_singular(z: f64, s: f64, params: &GreenParams) -> Result<Complex64> {
    kernel_singular_with(z, s, params, &PointwiseOptions::default())
}

/// [`kernel_singular`] with explicit options.
pub fn kernel_singular_with(z: f64, s: f64, params: &GreenParams, opts: &PointwiseOptions) -> Result<Complex64> {
    let l = params.half_length;
    let a = params.alpha_tilde;
    check_resonance(a, l)?;
    if z.abs() > l * (1.0 + 1e-12) || s.abs() > l * (1.0 + 1e-12) {
        return Err(NanoError::InvalidParameter("kernel arguments must lie in [-L, L]".into()));
    }
    if (z.abs() - l).abs() <= 1e-12 * l {
        // g(±L, ·) ≡ 0 and every term carries it.
        return Ok(Complex64::new(0.0, 0.0));
    }
    if (s.abs() - l).abs() <= 1e-12 * l {
        return Err(NanoError::SingularPoint("kernel is singular at s = ±L".into()));
    }
    if z == s {
        return Err(NanoError::SingularPoint("kernel is log-singular at s = z".into()));
    }
    let g = |zp: f64| g_closed_unchecked(z, zp, a, l);
    let gg = |x: f64| big_g_direct_surface(x, params);
    let scale_g = g(z).norm().max(1e-300);

    // F₁: log singularity at z′ = s, kink at z′ = z.
    let mut breaks = vec![-l, l, z, s];
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let tol1 = opts.rel_tol * scale_g * gg(l.min(10.0 * params.radius)).norm() * l;
    let f1 = quad::adaptive_breaks(&breaks, tol1, &mut |zp: f64| {
        if zp == s {
            Complex64::new(0.0, 0.0)
        } else {
            g(zp) * gg(s - zp)
        }
    }) * (params.k_free * params.k_free);

    let gp = |x: f64| big_g_derivative(x, params, 1).expect("non-zero separation");
    let gpp = |x: f64| big_g_derivative(x, params, 2).expect("non-zero separation");
    let gzs = g(s);
    let f2 = gzs * (gp(s - l) - gp(s + l));

    // F₃: fold the symmetric neighbourhood of s, where the Cauchy parts of the
    // two sides cancel, then add the one-sided remainder.
    let reach = (l - s).min(s + l);
    let h3 = |zp: f64| (g(zp) - gzs) * gpp(s - zp);
    let dz = (z - s).abs();
    // G″ is even, so the folded integrand is G″(t)·[g(s + t) + g(s − t) − 2g(s)].
    // While both points stay on one side of the kink at z, g is a
    // combination of e^{±iα̃z′} and the bracket equals −4 sin²(α̃t/2)·g(s).
    let folded = |t: f64| {
        let second = if t < dz {
            let sh = (a * (0.5 * t)).sin();
            -4.0 * sh * sh * gzs
        } else {
            g(s + t) + g(s - t) - 2.0 * gzs
        };
        second * gpp(t)
    };
    let eps0 = if opts.exclusion > 0.0 { opts.exclusion } else { 1e-3 * reach.min(params.radius) };
    let scale3 = scale_g * gpp(params.radius).norm() * params.radius;
    let tol3 = opts.rel_tol * scale3 * params.radius;
    let remainder = {
        let (a0, b0) = if s + reach < l - 1e-15 * l { (s + reach, l) } else { (-l, s - reach) };
        let mut br = vec![a0, b0];
        if z > a0 && z < b0 {
            br.push(z);
        }
        br.sort_by(f64::total_cmp);
        if b0 > a0 {
            quad::adaptive_breaks(&br, tol3, &mut |zp: f64| h3(zp))
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let folded_from = |eps: f64| -> Complex64 {
        let mut br = vec![eps, reach];
        if dz > eps && dz < reach {
            br.push(dz);
        }
        br.sort_by(f64::total_cmp);
        quad::adaptive_breaks(&br, tol3, &mut |t: f64| folded(t))
    };
    // Richardson in the exclusion radius: the neglected piece is O(ε).
    let mut table: Vec<Complex64> = (0..opts.levels.max(2))
        .map(|lv| folded_from(eps0 / f64::powi(2.0, lv as i32)))
        .collect();
    let mut level = 1;
    while table.len() > 1 {
        let fac = f64::powi(2.0, level);
        table = table.windows(2).map(|w| (w[1] * fac - w[0]) / (fac - 1.0)).collect();
        level += 1;
    }
    let last_two = [folded_from(eps0 / 8.0), folded_from(eps0 / 16.0)];
    let pv = table[0];
    let spread = (last_two[1] * 2.0 - last_two[0] - pv).norm();
    if spread > 1e-3 * pv.norm().max(1e-300) && spread > 1e-6 * scale3 * l {
        return Err(NanoError::Regularization(format!(
            "principal value unsettled (spread {spread:.3e})"
        )));
    }
    let f3 = pv + remainder;
    Ok(f1 - f2 + f3)
}
