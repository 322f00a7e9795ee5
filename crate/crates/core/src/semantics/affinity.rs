//! Affinity Propagation clustering (Frey & Dueck, 2007) on a dense
//! similarity matrix, following the message-passing schedule and exemplar
//! refinement used by scikit-learn.

use rand_mt::Mt;

#[derive(Debug, Clone)]
pub struct AffinityPropagation {
    /// Damping factor in [0.5, 1).
    pub damping: f64,
    pub max_iter: usize,
    /// Iterations with an unchanged exemplar set required to stop.
    pub convergence_iter: usize,
    /// Self-similarity; `None` uses the median of the off-diagonal similarities.
    pub preference: Option<f64>,
    /// Seed of the tie-breaking noise added to the similarities.
    pub seed: u32,
}

impl Default for AffinityPropagation {
    fn default() -> Self {
        AffinityPropagation {
            damping: 0.5,
            max_iter: 200,
            convergence_iter: 15,
            preference: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Exemplar point indices, ascending.
    pub exemplars: Vec<usize>,
    /// Cluster index (into `exemplars`) of every point.
    pub labels: Vec<usize>,
    pub converged: bool,
    pub iterations: usize,
}

/// Negative squared Euclidean distances, row-major `n × n`.
pub fn negative_squared_euclidean(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len();
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            s[i * n + j] = -d;
            s[j * n + i] = -d;
        }
    }
    s
}

/// Standard normal draws matching NumPy's legacy `RandomState(seed)`
/// stream (Mersenne Twister, polar Box-Muller), so that tie-breaking noise
/// agrees with reference implementations built on it.
struct LegacyNormal {
    mt: Mt,
    saved: Option<f64>,
}

impl LegacyNormal {
    fn new(seed: u32) -> Self {
        LegacyNormal {
            mt: Mt::new(seed),
            saved: None,
        }
    }

    fn uniform(&mut self) -> f64 {
        let a = (self.mt.next_u32() >> 5) as f64;
        let b = (self.mt.next_u32() >> 6) as f64;
        (a * 67_108_864.0 + b) / 9_007_199_254_740_992.0
    }

    fn next(&mut self) -> f64 {
        if let Some(g) = self.saved.take() {
            return g;
        }
        loop {
            let x1 = 2.0 * self.uniform() - 1.0;
            let x2 = 2.0 * self.uniform() - 1.0;
            let r2 = x1 * x1 + x2 * x2;
            if r2 < 1.0 && r2 != 0.0 {
                let f = (-2.0 * r2.ln() / r2).sqrt();
                self.saved = Some(f * x1);
                return f * x2;
            }
        }
    }
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        (values[m / 2 - 1] + values[m / 2]) / 2.0
    }
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

impl AffinityPropagation {
    /// Clusters `n` points given their row-major similarity matrix. Returns
    /// `converged = false` with no exemplars when message passing does not
    /// settle within `max_iter` iterations.
    pub fn fit(&self, similarity: &[f64], n: usize) -> Clustering {
        assert_eq!(similarity.len(), n * n, "similarity matrix must be n × n");
        if n == 0 {
            return Clustering {
                exemplars: vec![],
                labels: vec![],
                converged: false,
                iterations: 0,
            };
        }
        let off_diagonal: Vec<f64> = (0..n * n)
            .filter(|idx| idx / n != idx % n)
            .map(|idx| similarity[idx])
            .collect();
        let preference = self.preference.unwrap_or_else(|| {
            if n > 1 {
                median(off_diagonal.clone())
            } else {
                0.0
            }
        });

        // With all similarities equal there is nothing to propagate: either
        // every point is its own exemplar or all share one.
        if n == 1 || off_diagonal.iter().all(|&x| x == off_diagonal[0]) {
            let own = n > 1 && preference > off_diagonal[0];
            return Clustering {
                exemplars: if own { (0..n).collect() } else { vec![0] },
                labels: if own { (0..n).collect() } else { vec![0; n] },
                converged: true,
                iterations: 0,
            };
        }

        let mut s = similarity.to_vec();
        for i in 0..n {
            s[i * n + i] = preference;
        }
        // Tiny noise breaks ties between identical points.
        let mut normal = LegacyNormal::new(self.seed);
        for x in s.iter_mut() {
            *x += (f64::EPSILON * *x + f64::MIN_POSITIVE * 100.0) * normal.next();
        }

        let mut r = vec![0.0; n * n];
        let mut a = vec![0.0; n * n];
        let mut rp_col = vec![0.0; n];
        let window = self.convergence_iter.max(1);
        let mut history = vec![false; n * window];
        let mut exemplar_flags = vec![false; n];
        let mut converged = false;
        let mut iterations = 0;
        let keep = self.damping;
        let take = 1.0 - self.damping;

        for it in 0..self.max_iter {
            iterations = it + 1;
            // Responsibilities.
            for i in 0..n {
                let row = i * n;
                let mut best = 0;
                let mut y = f64::NEG_INFINITY;
                for k in 0..n {
                    let v = a[row + k] + s[row + k];
                    if v > y {
                        y = v;
                        best = k;
                    }
                }
                let mut y2 = f64::NEG_INFINITY;
                for k in 0..n {
                    if k != best {
                        y2 = y2.max(a[row + k] + s[row + k]);
                    }
                }
                for k in 0..n {
                    let fresh = s[row + k] - if k == best { y2 } else { y };
                    r[row + k] = keep * r[row + k] + take * fresh;
                }
            }
            // Availabilities.
            for k in 0..n {
                let mut col_sum = 0.0;
                for i in 0..n {
                    let v = r[i * n + k];
                    rp_col[i] = if i == k { v } else { v.max(0.0) };
                    col_sum += rp_col[i];
                }
                for i in 0..n {
                    let v = col_sum - rp_col[i];
                    let fresh = if i == k { v } else { v.min(0.0) };
                    a[i * n + k] = keep * a[i * n + k] + take * fresh;
                }
            }

            let slot = it % window;
            let mut count = 0;
            for i in 0..n {
                exemplar_flags[i] = a[i * n + i] + r[i * n + i] > 0.0;
                history[i * window + slot] = exemplar_flags[i];
                count += usize::from(exemplar_flags[i]);
            }
            if it >= window {
                let stable = (0..n).all(|i| {
                    let on = history[i * window..(i + 1) * window]
                        .iter()
                        .filter(|&&f| f)
                        .count();
                    on == 0 || on == window
                });
                if stable && count > 0 {
                    converged = true;
                    break;
                }
            }
        }

        if !converged {
            return Clustering {
                exemplars: vec![],
                labels: vec![],
                converged: false,
                iterations,
            };
        }

        let mut exemplars: Vec<usize> = (0..n).filter(|&i| exemplar_flags[i]).collect();
        let assign = |exemplars: &[usize]| -> Vec<usize> {
            let mut c: Vec<usize> = (0..n)
                .map(|i| argmax(exemplars.iter().map(|&e| s[i * n + e])))
                .collect();
            for (k, &e) in exemplars.iter().enumerate() {
                c[e] = k;
            }
            c
        };
        // Refine: within each cluster, pick the member with the largest
        // total similarity to the other members.
        let c = assign(&exemplars);
        for (k, exemplar) in exemplars.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|&i| c[i] == k).collect();
            let j = argmax(
                members
                    .iter()
                    .map(|&col| members.iter().map(|&row| s[row * n + col]).sum::<f64>()),
            );
            *exemplar = members[j];
        }
        let c = assign(&exemplars);
        let point_exemplar: Vec<usize> = c.iter().map(|&k| exemplars[k]).collect();
        let mut unique = point_exemplar.clone();
        unique.sort_unstable();
        unique.dedup();
        let labels = point_exemplar
            .iter()
            .map(|e| unique.binary_search(e).unwrap())
            .collect();
        Clustering {
            exemplars: unique,
            labels,
            converged: true,
            iterations,
        }
    }
}
