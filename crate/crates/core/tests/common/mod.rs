//! Reference implementations written without the library's algorithms.
#![allow(dead_code)]

use turboeq::trellis::RscCode;

pub fn sym(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn bits_of(mask: usize, n: usize) -> Vec<u8> {
    (0..n).map(|k| (mask >> k & 1) as u8).collect()
}

/// `ln Σ exp` over a possibly empty list.
pub fn lse(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn clamp50(x: f64) -> f64 {
    x.clamp(-50.0, 50.0)
}

/// Gaussian elimination with partial pivoting.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

/// `H[i][j] = h_{i + offset - j}` with `rows` rows and `rows + offset` columns.
pub fn conv_matrix(taps: &[f64], rows: usize, offset: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|i| {
            (0..rows + offset)
                .map(|j| {
                    let k = i as isize + offset as isize - j as isize;
                    if k >= 0 && (k as usize) < taps.len() {
                        taps[k as usize]
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// MMSE feedforward taps `(N0 I + Σ_{j ≥ skip} w_j h_j h_jᵀ)⁻¹ h_t` with
/// `w_t = 1` and `w_j = z_j` elsewhere.
pub fn mmse_taps(h: &[Vec<f64>], z: &[f64], target: usize, skip: usize, n0: f64) -> Vec<f64> {
    let rows = h.len();
    let cols = h[0].len();
    let mut a = vec![vec![0.0; rows]; rows];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = n0;
    }
    for j in skip..cols {
        let w = if j == target { 1.0 } else { z[j] };
        for r in 0..rows {
            for c in 0..rows {
                a[r][c] += w * h[r][j] * h[c][j];
            }
        }
    }
    let s: Vec<f64> = h.iter().map(|row| row[target]).collect();
    solve(&a, &s)
}

pub fn coded_words(k: usize) -> Vec<Vec<u8>> {
    (0..1 << k)
        .map(|m| RscCode.encode(&bits_of(m, k)))
        .collect()
}

/// Exhaustive extrinsic LLRs of every coded bit and posterior LLRs of the
/// message bits for channel LLRs `llr` on the coded bits.
pub fn decoder_app(k: usize, llr: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let words = coded_words(k);
    let metric = |w: &Vec<u8>, skip: Option<usize>| {
        w.iter()
            .enumerate()
            .filter(|&(s, _)| Some(s) != skip)
            .map(|(s, &b)| 0.5 * sym(b) * llr[s])
            .sum::<f64>()
    };
    let ext = (0..llr.len())
        .map(|t| {
            let num: Vec<f64> = words
                .iter()
                .filter(|w| w[t] == 0)
                .map(|w| metric(w, Some(t)))
                .collect();
            let den: Vec<f64> = words
                .iter()
                .filter(|w| w[t] == 1)
                .map(|w| metric(w, Some(t)))
                .collect();
            clamp50(lse(&num) - lse(&den))
        })
        .collect();
    let post = (0..k)
        .map(|m| {
            let num: Vec<f64> = (0..1 << k)
                .filter(|x| x >> m & 1 == 0)
                .map(|x| metric(&words[x], None))
                .collect();
            let den: Vec<f64> = (0..1 << k)
                .filter(|x| x >> m & 1 == 1)
                .map(|x| metric(&words[x], None))
                .collect();
            clamp50(lse(&num) - lse(&den))
        })
        .collect();
    (ext, post)
}

/// Exhaustive equalizer extrinsic over `n` payload symbols between guards
/// of `+1` symbols, for samples covering the frame and its channel tail.
pub fn equalizer_app(
    taps: &[f64],
    guard: usize,
    n: usize,
    samples: &[f64],
    n0: f64,
    la: &[f64],
) -> Vec<f64> {
    let mut metrics = Vec::with_capacity(1 << n);
    for mask in 0..1usize << n {
        let mut x = vec![1.0; 2 * guard + n];
        for k in 0..n {
            x[guard + k] = if mask >> k & 1 == 0 { 1.0 } else { -1.0 };
        }
        let mut dist = 0.0;
        for (t, r) in samples.iter().enumerate() {
            let mut s = 0.0;
            for (m, h) in taps.iter().enumerate() {
                let idx = t as isize - m as isize;
                let xv = if idx < 0 || idx as usize >= x.len() {
                    1.0
                } else {
                    x[idx as usize]
                };
                s += h * xv;
            }
            dist += (r - s) * (r - s);
        }
        let prior: f64 = (0..n).map(|k| 0.5 * x[guard + k] * la[k]).sum();
        metrics.push((mask, -dist / (2.0 * n0) + prior));
    }
    (0..n)
        .map(|k| {
            let num: Vec<f64> = metrics
                .iter()
                .filter(|(m, _)| m >> k & 1 == 0)
                .map(|p| p.1)
                .collect();
            let den: Vec<f64> = metrics
                .iter()
                .filter(|(m, _)| m >> k & 1 == 1)
                .map(|p| p.1)
                .collect();
            clamp50(lse(&num) - lse(&den) - la[k])
        })
        .collect()
}

/// Mixture of per-pattern posteriors in the probability domain.
pub fn enumerated_oracle(y: f64, p0: f64, var_v: f64, d: &[f64], llr: &[f64], dec: &[f64]) -> f64 {
    let n = d.len();
    let mut p_plus = 0.0;
    let mut p_minus = 0.0;
    for mask in 0..1usize << n {
        let mut pr = 1.0;
        let mut isi = 0.0;
        for k in 0..n {
            let x = if mask >> k & 1 == 0 { 1.0 } else { -1.0 };
            pr *= 1.0 / (1.0 + (-x * llr[k]).exp());
            isi += d[k] * (x - dec[k]);
        }
        let le = 2.0 * p0 * (y - isi) / var_v;
        p_plus += pr / (1.0 + (-le).exp());
        p_minus += pr / (1.0 + le.exp());
    }
    clamp50((p_plus / p_minus).ln())
}

pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Five-point stencil, error O(h⁴).
pub fn five_point_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}
