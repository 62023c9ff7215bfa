use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub dim: usize,
    /// Row-major `[nlist x dim]`.
    pub centroids: Vec<f64>,
    /// Total squared distance after each assignment step.
    pub distortion: Vec<f64>,
}

impl KMeans {
    pub fn nlist(&self) -> usize {
        self.centroids.len() / self.dim
    }

    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.dim..][..self.dim]
    }

    /// Nearest centroid and its squared distance; ties go to the lower index.
    pub fn nearest(&self, point: &[f32]) -> (usize, f64) {
        nearest(&self.centroids, self.dim, point)
    }
}

fn dist(centroid: &[f64], point: &[f32]) -> f64 {
    centroid
        .iter()
        .zip(point)
        .map(|(c, &p)| {
            let d = p as f64 - c;
            d * d
        })
        .sum()
}

fn nearest(centroids: &[f64], dim: usize, point: &[f32]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.chunks_exact(dim).enumerate() {
        let d = dist(centroid, point);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Lloyd's iterations from a seeded k-means++ start over row-major `data`.
/// A cluster left empty is re-seeded at the point farthest from its current
/// centroid.
pub fn kmeans_train(data: &[f32], dim: usize, nlist: usize, iters: usize, seed: u64) -> Result<KMeans> {
    if dim == 0 || data.len() % dim != 0 {
        return Err(Error::DimensionMismatch {
            context: "k-means data",
            expected: dim,
            actual: data.len(),
        });
    }
    let n = data.len() / dim;
    if nlist == 0 || n < nlist {
        return Err(Error::invalid(alloc::format!("k-means needs n >= nlist >= 1 (n = {n}, nlist = {nlist})")));
    }
    let point = |i: usize| &data[i * dim..][..dim];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // k-means++ seeding
    let mut centroids: Vec<f64> = Vec::with_capacity(nlist * dim);
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    centroids.extend(point(first).iter().map(|&v| v as f64));
    let mut d2: Vec<f64> = (0..n).map(|i| dist(&centroids[..dim], point(i))).collect();
    for _ in 1..nlist {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if r < w {
                        break;
                    }
                    r -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            chosen.iter().position(|c| !c).unwrap_or(0)
        };
        chosen[pick] = true;
        let start = centroids.len();
        centroids.extend(point(pick).iter().map(|&v| v as f64));
        for (i, w) in d2.iter_mut().enumerate() {
            *w = w.min(dist(&centroids[start..], point(i)));
        }
    }

    let mut assign = vec![usize::MAX; n];
    let mut distortion = Vec::new();
    for _ in 0..iters.max(1) {
        let mut changed = false;
        let mut total = 0.0;
        for i in 0..n {
            let (c, d) = nearest(&centroids, dim, point(i));
            changed |= assign[i] != c;
            assign[i] = c;
            total += d;
        }
        distortion.push(total);
        if !changed {
            break;
        }

        let mut sums = vec![0.0f64; nlist * dim];
        let mut counts = vec![0usize; nlist];
        for i in 0..n {
            let c = assign[i];
            counts[c] += 1;
            sums[c * dim..][..dim].iter_mut().zip(point(i)).for_each(|(s, &v)| *s += v as f64);
        }
        for c in 0..nlist {
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                centroids[c * dim..][..dim]
                    .iter_mut()
                    .zip(&sums[c * dim..][..dim])
                    .for_each(|(x, s)| *x = s * inv);
            }
        }
        let mut taken = vec![false; n];
        for c in (0..nlist).filter(|&c| counts[c] == 0) {
            let far = (0..n)
                .filter(|&i| !taken[i])
                .map(|i| (i, dist(&centroids[assign[i] * dim..][..dim], point(i))))
                .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                    Some((_, bd)) if bd >= d => best,
                    _ => Some((i, d)),
                });
            if let Some((i, _)) = far {
                taken[i] = true;
                centroids[c * dim..][..dim]
                    .iter_mut()
                    .zip(point(i))
                    .for_each(|(x, &v)| *x = v as f64);
            }
        }
    }
    Ok(KMeans {
        dim,
        centroids,
        distortion,
    })
}
