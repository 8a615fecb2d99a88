//! Independent oracles shared by the integration and acceptance tests.
//! Nothing here calls into the crate's decomposition or fitting code.

#![allow(dead_code)]

/// Two-factor corner values `[f00, f10, f01, f11]` (first index = x switched).
pub fn corners_2(f: impl Fn(f64, f64) -> f64, x: (f64, f64), y: (f64, f64)) -> [f64; 4] {
    [f(x.0, y.0), f(x.1, y.0), f(x.0, y.1), f(x.1, y.1)]
}

/// Cell (0,0) of the 2×2 table with odds ratio `theta`, first-row total
/// `r`, first-column total `c` and grand total `n`. Solves
/// `a (n - r - c + a) = theta (r - a)(c - a)` for the root inside the
/// feasible range.
pub fn quadratic_2x2_cell(theta: f64, r: f64, c: f64, n: f64) -> f64 {
    let lo = (r + c - n).max(0.0);
    let hi = r.min(c);
    if (theta - 1.0).abs() < 1e-15 {
        return r * c / n;
    }
    let qa = 1.0 - theta;
    let qb = (n - r - c) + theta * (r + c);
    let qc = -theta * r * c;
    let disc = (qb * qb - 4.0 * qa * qc).sqrt();
    [(-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa)]
        .into_iter()
        .find(|a| *a >= lo - 1e-9 && *a <= hi + 1e-9)
        .expect("no feasible root")
}

/// Homogamy share of the 2×2 table fixed by odds ratio and margins.
pub fn quadratic_2x2_share(theta: f64, r: f64, c: f64, n: f64) -> f64 {
    let a = quadratic_2x2_cell(theta, r, c, n);
    let d = n - r - c + a;
    (a + d) / n
}

/// Plain Sinkhorn scaling written separately from the crate's IPF
/// (column sweep first, fixed iteration budget).
pub fn sinkhorn(seed: &[Vec<f64>], rows: &[f64], cols: &[f64]) -> Vec<Vec<f64>> {
    let k = rows.len();
    let mut t: Vec<Vec<f64>> = seed.to_vec();
    for _ in 0..20_000 {
        for j in 0..k {
            let s: f64 = (0..k).map(|i| t[i][j]).sum();
            for row in t.iter_mut() {
                row[j] *= cols[j] / s;
            }
        }
        for (i, row) in t.iter_mut().enumerate() {
            let s: f64 = row.iter().sum();
            for v in row.iter_mut() {
                *v *= rows[i] / s;
            }
        }
        let dev = (0..k)
            .map(|j| ((0..k).map(|i| t[i][j]).sum::<f64>() - cols[j]).abs())
            .fold(0.0, f64::max);
        if dev < 1e-14 * rows.iter().sum::<f64>() {
            break;
        }
    }
    t
}

pub fn diag_share(t: &[Vec<f64>]) -> f64 {
    let total: f64 = t.iter().flatten().sum();
    (0..t.len()).map(|i| t[i][i]).sum::<f64>() / total
}

/// 3×3 association seed: diagonal weights `exp(d)`, cells above the
/// diagonal weighted `exp(u * distance)`.
pub fn banded_seed(d: [f64; 3], u: f64) -> Vec<Vec<f64>> {
    let mut s = vec![vec![1.0; 3]; 3];
    for (i, row) in s.iter_mut().enumerate() {
        row[i] = d[i].exp();
        for (j, cell) in row.iter_mut().enumerate().skip(i + 1) {
            *cell = (u * (j - i) as f64).exp();
        }
    }
    s
}

#[derive(Debug, Clone)]
pub struct SignFlipCase {
    pub seed0: Vec<Vec<f64>>,
    pub seed1: Vec<Vec<f64>>,
    pub margins0: [f64; 3],
    pub margins1: [f64; 3],
    /// Oracle corner shares `[f(a0,m0), f(a1,m0), f(a0,m1), f(a1,m1)]`.
    pub corners: [f64; 4],
}

impl SignFlipCase {
    pub fn preference(&self) -> f64 {
        self.corners[1] - self.corners[0]
    }

    pub fn interaction(&self) -> f64 {
        let [f00, f10, f01, f11] = self.corners;
        f11 - f10 - f01 + f00
    }

    /// Preference component when availability switches first.
    pub fn preference_availability_first(&self) -> f64 {
        self.corners[3] - self.corners[2]
    }

    /// Observed tables of 1000 couples at the two waves.
    pub fn tables(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let scale = |m: [f64; 3]| m.map(|v| v * 1000.0);
        (
            sinkhorn(&self.seed0, &scale(self.margins0), &scale(self.margins0)),
            sinkhorn(&self.seed1, &scale(self.margins1), &scale(self.margins1)),
        )
    }
}

/// Grid search over banded 3×3 seeds and symmetric marginals for a wave
/// pair whose preference effect and interaction have opposite signs, with
/// `|interaction| >= 0.9 |preference|`, and whose availability-first
/// preference component has the opposite sign to the path-independent one.
/// Returns the first hit in grid order.
pub fn find_sign_flip() -> Option<SignFlipCase> {
    let diag = [0.0, 2.0];
    let ups = [-1.0, 0.0, 1.0];
    let margins = [[0.6, 0.3, 0.1], [0.1, 0.3, 0.6], [0.2, 0.6, 0.2]];
    let mut diags = Vec::new();
    for a in diag {
        for b in diag {
            for c in diag {
                diags.push([a, b, c]);
            }
        }
    }
    for d0 in &diags {
        for d1 in &diags {
            for &u0 in &ups {
                for &u1 in &ups {
                    let (s0, s1) = (banded_seed(*d0, u0), banded_seed(*d1, u1));
                    for m0 in &margins {
                        for m1 in &margins {
                            let f = |s: &Vec<Vec<f64>>, m: &[f64; 3]| diag_share(&sinkhorn(s, m, m));
                            let corners = [f(&s0, m0), f(&s1, m0), f(&s0, m1), f(&s1, m1)];
                            let case = SignFlipCase {
                                seed0: s0.clone(),
                                seed1: s1.clone(),
                                margins0: *m0,
                                margins1: *m1,
                                corners,
                            };
                            let (p, i, p2) = (
                                case.preference(),
                                case.interaction(),
                                case.preference_availability_first(),
                            );
                            if p * i < 0.0 && i.abs() >= 0.9 * p.abs() && p * p2 < 0.0 && p.abs().min(p2.abs()) > 0.01 {
                                return Some(case);
                            }
                        }
                    }
                }
            }
        }
    }
    None
}
