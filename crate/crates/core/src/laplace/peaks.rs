use super::Spectrum;

/// A cluster of spectral weight: log-domain weighted centroid (s) and summed weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub t2: f64,
    pub weight: f64,
}

// a run is split at an interior minimum no higher than this fraction of both flanking maxima
const VALLEY_RATIO: f64 = 0.8;
// runs of nonzero weight closer than this (in decades of T2) belong to one peak
const MERGE_DECADES: f64 = 0.15;

/// Clusters runs of nonzero weight, splitting runs at pronounced valleys and merging runs
/// separated by less than 0.15 decades of zero weight.
/// Returns clusters holding at least `min_weight_frac` of the total, sorted by T2.
pub fn spectrum_peaks(spectrum: &Spectrum, min_weight_frac: f64) -> Vec<Peak> {
    let w = &spectrum.weights;
    let g = spectrum.grid.points();
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Vec::new();
    }
    let mut segs = Vec::new();
    let mut i = 0;
    while i < w.len() {
        if w[i] <= 0.0 {
            i += 1;
            continue;
        }
        let start = i;
        while i < w.len() && w[i] > 0.0 {
            i += 1;
        }
        let before = segs.len();
        split_run(w, start, i, &mut segs);
        if before > 0 {
            let (a0, b0) = segs[before - 1];
            if (g[start] / g[b0 - 1]).log10() < MERGE_DECADES {
                segs[before - 1] = (a0, segs[before].1);
                segs.remove(before);
            }
        }
    }
    segs.into_iter()
        .filter_map(|(a, b)| {
            let ws: f64 = w[a..b].iter().sum();
            if ws < min_weight_frac * total {
                return None;
            }
            let lc: f64 = (a..b).map(|k| w[k] * g[k].ln()).sum::<f64>() / ws;
            Some(Peak { t2: lc.exp(), weight: ws })
        })
        .collect()
}

fn split_run(w: &[f64], a: usize, b: usize, out: &mut Vec<(usize, usize)>) {
    let mut cut = a;
    for k in a + 1..b.saturating_sub(1) {
        if w[k] < w[k - 1] && w[k] <= w[k + 1] {
            let left = w[cut..k].iter().cloned().fold(0.0, f64::max);
            let right = w[k + 1..b].iter().cloned().fold(0.0, f64::max);
            if w[k] <= VALLEY_RATIO * left.min(right) {
                out.push((cut, k));
                cut = k;
            }
        }
    }
    out.push((cut, b));
}
