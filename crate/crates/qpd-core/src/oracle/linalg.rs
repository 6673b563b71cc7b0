//! Dense complex linear algebra for the truncated Fock space: bosonic
//! operators, a Padé scaling-and-squaring matrix exponential, Hermitian
//! eigenvalues, and scaled displacement-operator matrix elements stable
//! across the whole characteristic-function grid.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::OnceLock;

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Annihilation operator on a d-dimensional truncation: a[n-1, n] = √n.
pub fn annihilation(d: usize) -> CMat {
    let mut a = CMat::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = c((n as f64).sqrt(), 0.0);
    }
    a
}

/// Matrix exponential by Padé-13 approximation with scaling and squaring.
pub fn expm(a: &CMat) -> CMat {
    const THETA13: f64 = 5.371_920_351_148_152;
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let d = a.nrows();
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let b = |k: usize| c(B[k], 0.0);
    let scaled = a.map(|x| x / 2f64.powi(s));
    let ident = CMat::identity(d, d);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &ident * b(1);
    let u = &scaled * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &ident * b(0);
    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .expect("Padé denominator is invertible for scaled inputs");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// ascending. Used for PSD checks and trace distances; sizes stay small.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let d = m.nrows();
    let mut a = m.clone();
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..d {
            for q in (p + 1)..d {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                if apq.norm() < 1e-18 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // unitary 2x2 diagonalization of [[app, apq], [apq*, aqq]]
                let phi = apq.arg();
                let g = apq.norm();
                let theta = 0.5 * (2.0 * g).atan2(aqq - app);
                let (sin, cos) = theta.sin_cos();
                let e_iphi = Complex64::from_polar(1.0, phi);
                // rows/cols rotation: p' = c·p - s·e^{iφ} q ; q' = s·e^{-iφ} p + c·q
                for k in 0..d {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cos - akq * e_iphi.conj() * sin;
                    a[(k, q)] = akp * e_iphi * sin + akq * cos;
                }
                for k in 0..d {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * cos - aqk * e_iphi * sin;
                    a[(q, k)] = apk * e_iphi.conj() * sin + aqk * cos;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..d).map(|i| a[(i, i)].re).collect();
    eigs.sort_by(f64::total_cmp);
    eigs
}

fn ln_factorial(k: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0f64; 201];
        for k in 1..=200 {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    });
    table[k]
}

/// Fills `out` (row-major d×d) with <m|D(ξ)|n>. The diagonals are computed
/// through a rescaled Laguerre recurrence that folds the e^(-|ξ|²/2) factor
/// into the running value, so entries stay representable over the whole
/// conjugate grid (every matrix element of the unitary D is bounded by 1).
pub fn displacement_elements(d: usize, xi: Complex64, out: &mut [Complex64]) {
    debug_assert_eq!(out.len(), d * d);
    let t = xi.norm_sqr();
    if t == 0.0 {
        out.fill(c(0.0, 0.0));
        for n in 0..d {
            out[n * d + n] = c(1.0, 0.0);
        }
        return;
    }
    let phi = xi.arg();
    for k in 0..d {
        // start of diagonal m = n + k: |<k|D|0>| = exp(k/2·ln t - t/2 - ln k!/2)
        let log_start = 0.5 * (k as f64) * t.ln() - 0.5 * t - 0.5 * ln_factorial(k);
        let start = if log_start < -745.0 { 0.0 } else { log_start.exp() };
        let upper_phase = Complex64::from_polar(1.0, phi * k as f64);
        let lower_phase = Complex64::from_polar(1.0, -phi * k as f64)
            * if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut prev = 0.0f64;
        let mut cur = start;
        for n in 0..(d - k) {
            let m = n + k;
            out[m * d + n] = upper_phase * cur;
            if k > 0 {
                out[n * d + m] = lower_phase * cur;
            }
            // advance to n+1 via the generalized Laguerre recurrence with
            // the normalization ratio ρ_n = sqrt((n+1)/(n+k+1)) folded in
            let nf = n as f64;
            let kf = k as f64;
            let rho_n = ((nf + 1.0) / (nf + kf + 1.0)).sqrt();
            let rho_nm1 = if n == 0 {
                0.0
            } else {
                (nf / (nf + kf)).sqrt()
            };
            let next = ((2.0 * nf + kf + 1.0 - t) * rho_n * cur
                - (nf + kf) * rho_n * rho_nm1 * prev)
                / (nf + 1.0);
            prev = cur;
            cur = next;
        }
    }
}
