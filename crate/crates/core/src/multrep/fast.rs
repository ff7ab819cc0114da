//! Accelerated matrix coefficients.
//!
//! Words `y` on a large sphere are grouped by the length `k` of their common
//! prefix with `x`: `y = p_k z` and `x⁻¹y = u_k z` with `p_k = x_1…x_k` and
//! `u_k = (x_{k+1}…x_n)⁻¹`. Once both `f(u_k z)` and `g(p_k z)` propagate by
//! the maps, compatibility collapses all extensions of `z` into the single
//! term `B_{last z}(f(u_k z), g(p_k z))`. For interior `k` with `|z| = 1` the
//! sum over the first letter is a precomputed cross form
//! `C_{a,a'} = Σ_c H_{c,a}* B_c H_{c,a'}`, so the cost is linear in `|x|`.

use super::brute::{Kernel, Seeds};
use crate::linalg::C64;
use crate::scalar::Dense;
use crate::words::{Letter, Word};

/// `C_{a,a'}` for every ordered pair, indexed `a * n + a'`.
pub fn cross_forms(k: &Kernel<C64>) -> Vec<Dense<C64>> {
    let al = &k.alphabet;
    let n = al.len();
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for a2 in 0..n {
            let mut m = Dense::zeros(k.dims[a], k.dims[a2]);
            for c in 0..n {
                let h1 = k.map(c, a);
                let h2 = k.map(c, a2);
                if h1.is_zero() || h2.is_zero() {
                    continue;
                }
                let bc = &k.forms[c];
                // m += h1* · B_c · h2
                for i in 0..k.dims[a] {
                    for j in 0..k.dims[a2] {
                        let mut acc = C64::new(0.0, 0.0);
                        for r in 0..k.dims[c] {
                            let mut t = C64::new(0.0, 0.0);
                            for s in 0..k.dims[c] {
                                t += bc.get(r, s) * h2.get(s, j);
                            }
                            acc += h1.get(r, i).conj() * t;
                        }
                        m.data[i * k.dims[a2] + j] += acc;
                    }
                }
            }
            out.push(m);
        }
    }
    out
}

fn extend(k: &Kernel<C64>, seeds: &Seeds<C64>, base: &[Letter], base_val: Option<&Vec<C64>>, z: &[Letter]) -> Vec<C64> {
    match base_val {
        Some(v) if !base.is_empty() => {
            let mut cur = v.clone();
            let mut prev = *base.last().expect("nonempty");
            let mut buf = Vec::new();
            for &c in z {
                k.map(c, prev).apply_into(&cur, &mut buf);
                std::mem::swap(&mut cur, &mut buf);
                prev = c;
            }
            cur
        }
        _ => {
            let mut w = base.to_vec();
            w.extend_from_slice(z);
            seeds.eval(k, &w)
        }
    }
}

/// `⟨π(x)f, g⟩` by cone decomposition along the geodesic from `e` to `x`.
pub fn coefficient(kern: &Kernel<C64>, cross: &[Dense<C64>], x: &Word, f: Seeds<C64>, g: Seeds<C64>) -> C64 {
    let al = &kern.alphabet;
    let nl = al.len();
    let xs = x.letters();
    let n = xs.len();
    let (mf, mg) = (f.depth, g.depth);

    // u_k = u_{k+1} · x_{k+1}⁻¹
    let mut u_words: Vec<Vec<Letter>> = vec![Vec::new(); n + 1];
    for k in (0..n).rev() {
        let mut w = u_words[k + 1].clone();
        w.push(al.inverse(xs[k]));
        u_words[k] = w;
    }
    let mut fu: Vec<Option<Vec<C64>>> = vec![None; n + 1];
    for k in (0..=n).rev() {
        let len = n - k;
        if len == mf {
            fu[k] = Some(f.eval(kern, &u_words[k]));
        } else if len > mf {
            let prev = fu[k + 1].as_ref().expect("filled above");
            fu[k] = Some(kern.map(al.inverse(xs[k]), al.inverse(xs[k + 1])).apply(prev));
        }
    }
    let mut gp: Vec<Option<Vec<C64>>> = vec![None; n + 1];
    for k in 0..=n {
        if k == mg {
            gp[k] = Some(g.eval(kern, &xs[..k]));
        } else if k > mg {
            let prev = gp[k - 1].as_ref().expect("filled above");
            gp[k] = Some(kern.map(xs[k - 1], xs[k - 2]).apply(prev));
        }
    }

    let mut sum = C64::new(0.0, 0.0);
    for k in 0..=n {
        let ell = 1usize.max(mf.saturating_sub(n - k)).max(mg.saturating_sub(k));
        if ell == 1 && k >= 1 && k < n {
            if let (Some(fv), Some(gv)) = (&fu[k], &gp[k]) {
                sum += cross[xs[k - 1] * nl + al.inverse(xs[k])].pair(fv, gv);
                continue;
            }
        }
        let banned_next = (k < n).then(|| xs[k]);
        let banned_back = (k >= 1).then(|| al.inverse(xs[k - 1]));
        for z in al.sphere(ell) {
            let z1 = z.letters()[0];
            if Some(z1) == banned_next || Some(z1) == banned_back {
                continue;
            }
            let fv = extend(kern, &f, &u_words[k], fu[k].as_ref(), z.letters());
            let gv = extend(kern, &g, &xs[..k], gp[k].as_ref(), z.letters());
            let last = *z.letters().last().expect("nonempty");
            sum += kern.forms[last].pair(&fv, &gv);
        }
    }
    sum
}
