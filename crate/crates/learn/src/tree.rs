//! Regression trees and the shared growth engine.
//!
//! Every learner grows trees from per-row gradients `g` and hessians `h`:
//! a leaf takes the value `-G / (H + lambda)` and a split is scored by
//! `GL²/(HL+λ) + GR²/(HR+λ) - G²/(H+λ)`. A random forest passes
//! `g = -w·y, h = w` (weighted means, variance reduction); boosting passes
//! squared-loss residuals with unit hessians.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::binning::{check_finite, BinnedMatrix};
use crate::error::{LearnError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub value: f64,
    /// Training weight reaching this node.
    pub samples: f64,
    pub split: Option<Split>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }
}

/// Binary tree stored in depth-first pre-order; node 0 is the root.
/// Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
    /// 0 means unlimited.
    pub max_depth: usize,
    pub min_samples_leaf: f64,
}

impl RegressionTree {
    pub fn leaf(value: f64, samples: f64, n_features: usize) -> Self {
        RegressionTree { nodes: vec![Node { value, samples, split: None }], n_features, max_depth: 0, min_samples_leaf: 1.0 }
    }

    /// Index of the leaf reached by `x`.
    pub fn leaf_index(&self, x: impl Fn(usize) -> f64) -> usize {
        let mut i = 0;
        while let Some(s) = &self.nodes[i].split {
            i = if x(s.feature) <= s.threshold { s.left } else { s.right };
        }
        i
    }

    pub fn predict_with(&self, x: impl Fn(usize) -> f64) -> f64 {
        self.nodes[self.leaf_index(x)].value
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.predict_with(|f| x[f])
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        check_width(x, self.n_features)?;
        Ok((0..x.nrows()).map(|i| self.predict_with(|f| x[(i, f)])).collect())
    }

    pub fn depth(&self) -> usize {
        fn go(t: &RegressionTree, i: usize) -> usize {
            match &t.nodes[i].split {
                None => 0,
                Some(s) => 1 + go(t, s.left).max(go(t, s.right)),
            }
        }
        go(self, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    /// Structural checks: child indices in range, every node reachable once,
    /// and `samples(parent) = samples(left) + samples(right)`.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(LearnError::EmptyDataset);
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut seen[i], true) {
                return Err(LearnError::InvalidParam(format!("node {i} reached twice")));
            }
            let n = &self.nodes[i];
            if !n.value.is_finite() || !n.samples.is_finite() {
                return Err(LearnError::NonFinite("tree node"));
            }
            if let Some(s) = &n.split {
                if s.left >= self.nodes.len() || s.right >= self.nodes.len() || s.feature >= self.n_features {
                    return Err(LearnError::InvalidParam(format!("node {i} has an out-of-range child or feature")));
                }
                let sum = self.nodes[s.left].samples + self.nodes[s.right].samples;
                if (sum - n.samples).abs() > 1e-9 * n.samples.abs().max(1.0) {
                    return Err(LearnError::InvalidParam(format!("node {i} sample count is not the sum of its children")));
                }
                stack.push(s.right);
                stack.push(s.left);
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(LearnError::InvalidParam("unreachable nodes".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_width(x: &DMatrix<f64>, n_features: usize) -> Result<()> {
    if x.ncols() != n_features && x.nrows() > 0 {
        return Err(LearnError::DimensionMismatch { expected: n_features, got: x.ncols() });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    /// Split every splittable node of a level before moving deeper.
    DepthWise,
    /// Always split the leaf with the largest gain.
    LeafWise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeParams {
    /// 0 means unlimited.
    pub max_depth: usize,
    pub min_samples_leaf: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: 0, min_samples_leaf: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct GrowConfig {
    pub max_depth: usize,
    pub min_samples_leaf: f64,
    pub lambda: f64,
    pub max_leaves: usize,
    pub growth: Growth,
    /// Histogram split finder over partitioned rows instead of the level-wise scan.
    pub histogram: bool,
    /// Features drawn per node; `None` uses every allowed feature.
    pub node_features: Option<usize>,
}

impl GrowConfig {
    pub fn new(max_depth: usize, min_samples_leaf: f64, lambda: f64) -> Self {
        GrowConfig {
            max_depth: if max_depth == 0 { usize::MAX } else { max_depth },
            min_samples_leaf,
            lambda,
            max_leaves: usize::MAX,
            growth: Growth::DepthWise,
            histogram: false,
            node_features: None,
        }
    }
}

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    /// Last bin sent left.
    bin: u32,
    threshold: f64,
}

/// Running best split of a node. The summed child score is kept as the
/// fraction `num / den` so candidates compare without dividing.
#[derive(Debug, Clone, Copy)]
struct Best {
    num: f64,
    den: f64,
    slot: usize,
    bin: u32,
    next: u32,
}

#[derive(Debug, Clone, Copy, Default)]
struct Stats {
    g: f64,
    h: f64,
    sq: f64,
    count: usize,
}

struct Build {
    value: f64,
    samples: f64,
    depth: usize,
    split: Option<(Candidate, usize, usize)>,
}

struct Grower<'a> {
    data: &'a BinnedMatrix,
    g: &'a [f64],
    h: &'a [f64],
    allowed: &'a [usize],
    cfg: &'a GrowConfig,
    nodes: Vec<Build>,
}

#[inline]
fn score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

fn threshold(lo_right: f64, hi_left: f64) -> f64 {
    let mid = hi_left + (lo_right - hi_left) / 2.0;
    if mid >= lo_right {
        hi_left
    } else {
        mid
    }
}

impl<'a> Grower<'a> {
    fn new_node(&mut self, st: &Stats, depth: usize) -> usize {
        self.nodes.push(Build { value: -st.g / (st.h + self.cfg.lambda), samples: st.h, depth, split: None });
        self.nodes.len() - 1
    }

    fn splittable(&self, st: &Stats, depth: usize) -> bool {
        depth < self.cfg.max_depth && st.count >= 2 && st.h >= 2.0 * self.cfg.min_samples_leaf
    }

    fn tolerance(st: &Stats) -> f64 {
        1e-10 * st.sq
    }

    /// Feature mask for one node, indexed like `allowed`.
    fn draw_mask(&self, rng: &mut ChaCha8Rng) -> Option<Vec<bool>> {
        let k = self.cfg.node_features?;
        if k >= self.allowed.len() {
            return None;
        }
        let mut mask = vec![false; self.allowed.len()];
        for i in sample(rng, self.allowed.len(), k).into_iter() {
            mask[i] = true;
        }
        Some(mask)
    }

    #[inline(always)]
    fn consider(&self, best: &mut Option<Best>, st: &Stats, gl: f64, hl: f64, slot: usize, bin: u32, next: u32) {
        let hr = st.h - hl;
        let msl = self.cfg.min_samples_leaf;
        if hl < msl || hr < msl {
            return;
        }
        let lambda = self.cfg.lambda;
        let gr = st.g - gl;
        let (a, c) = (hl + lambda, hr + lambda);
        let num = gl * gl * c + gr * gr * a;
        let den = a * c;
        if best.is_none_or(|b| num * b.den > b.num * den) {
            *best = Some(Best { num, den, slot, bin, next });
        }
    }

    /// Two-bin feature given the node's sums over its minority-bin rows.
    #[allow(clippy::too_many_arguments)]
    fn consider_binary(&self, best: &mut Option<Best>, st: &Stats, minority: u32, g: f64, h: f64, count: usize, slot: usize) {
        if count == 0 || count == st.count {
            return;
        }
        let (gl, hl) = if minority == 1 { (st.g - g, st.h - h) } else { (g, h) };
        self.consider(best, st, gl, hl, slot, 0, 1);
    }

    fn resolve(&self, best: Option<Best>, st: &Stats) -> Option<Candidate> {
        let b = best?;
        let feature = self.allowed[b.slot];
        let feat = &self.data.features[feature];
        Some(Candidate {
            gain: b.num / b.den - score(st.g, st.h, self.cfg.lambda),
            feature,
            bin: b.bin,
            threshold: threshold(feat.lo[b.next as usize], feat.hi[b.bin as usize]),
        })
    }

    fn finish(self) -> RegressionTree {
        // renumber into depth-first pre-order
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(0usize, usize::MAX, false)];
        while let Some((i, parent, is_left)) = stack.pop() {
            let id = out.len();
            let b = &self.nodes[i];
            out.push(Node { value: b.value, samples: b.samples, split: None });
            if parent != usize::MAX {
                let s: &mut Split = out[parent].split.as_mut().expect("parent is split");
                if is_left {
                    s.left = id;
                } else {
                    s.right = id;
                }
            }
            if let Some((c, l, r)) = b.split {
                out[id].split = Some(Split { feature: c.feature, threshold: c.threshold, left: 0, right: 0 });
                stack.push((r, id, false));
                stack.push((l, id, true));
            }
        }
        RegressionTree {
            nodes: out,
            n_features: self.data.features.len(),
            max_depth: if self.cfg.max_depth == usize::MAX { 0 } else { self.cfg.max_depth },
            min_samples_leaf: self.cfg.min_samples_leaf,
        }
    }

    /// Level-wise growth for per-node feature sampling. Every allowed feature
    /// keeps its live rows ordered by `(node, bin, row)`, so a node skips the
    /// features it did not draw at no cost; the lists are stable-partitioned
    /// into the children after each level.
    fn grow_scan_partitioned(mut self, rng: &mut ChaCha8Rng) -> RegressionTree {
        let n = self.data.n_rows;
        let p = self.allowed.len();
        let mut slot: Vec<u32> = (0..n).map(|r| if self.h[r] > 0.0 { 0 } else { NONE }).collect();
        // two-bin features hold only their minority rows
        let mut lists: Vec<Vec<u32>> = self
            .allowed
            .iter()
            .map(|&f| {
                let feat = &self.data.features[f];
                let src = feat.minority.as_ref().map_or(&feat.sorted, |m| &m.1);
                src.iter().copied().filter(|&r| slot[r as usize] != NONE).collect()
            })
            .collect();
        // segment starts per node, per feature
        let mut seg: Vec<Vec<usize>> = lists.iter().map(|l| vec![0, l.len()]).collect();
        let mut buf: Vec<u32> = Vec::with_capacity(n);
        let mut level: Vec<usize> = Vec::new();
        let mut depth = 0usize;
        loop {
            let width = if depth == 0 { 1 } else { level.len() };
            let mut stats = vec![Stats::default(); width];
            for r in 0..n {
                let s = slot[r];
                if s != NONE {
                    let st = &mut stats[s as usize];
                    st.g += self.g[r];
                    st.h += self.h[r];
                    st.sq += self.g[r] * self.g[r] / self.h[r];
                    st.count += 1;
                }
            }
            if depth == 0 {
                level.push(self.new_node(&stats[0], 0));
            } else {
                for (k, &id) in level.iter().enumerate() {
                    self.nodes[id].value = -stats[k].g / (stats[k].h + self.cfg.lambda);
                    self.nodes[id].samples = stats[k].h;
                }
            }
            let eligible: Vec<bool> = stats.iter().map(|st| self.splittable(st, depth)).collect();
            if !eligible.iter().any(|&e| e) {
                break;
            }
            let masks: Vec<Option<Vec<bool>>> =
                eligible.iter().map(|&e| if e { self.draw_mask(rng) } else { None }).collect();

            let mut best: Vec<Option<Best>> = vec![None; width];
            for fs in 0..p {
                let feat = &self.data.features[self.allowed[fs]];
                let list = &lists[fs];
                let bounds = &seg[fs];
                for s in 0..width {
                    if !eligible[s] || masks[s].as_ref().is_some_and(|m| !m[fs]) {
                        continue;
                    }
                    let rows = &list[bounds[s]..bounds[s + 1]];
                    let st = &stats[s];
                    if let Some((mb, _)) = &feat.minority {
                        let (mut g, mut h) = (0.0, 0.0);
                        for &r in rows {
                            g += self.g[r as usize];
                            h += self.h[r as usize];
                        }
                        self.consider_binary(&mut best[s], st, *mb, g, h, rows.len(), fs);
                        continue;
                    }
                    let Some(&first) = rows.first() else { continue };
                    let mut cur = feat.bins[first as usize];
                    let (mut gl, mut hl, mut bg, mut bh) = (0.0, 0.0, 0.0, 0.0);
                    for &r in rows {
                        let b = feat.bins[r as usize];
                        if b != cur {
                            gl += bg;
                            hl += bh;
                            self.consider(&mut best[s], st, gl, hl, fs, cur, b);
                            cur = b;
                            bg = 0.0;
                            bh = 0.0;
                        }
                        bg += self.g[r as usize];
                        bh += self.h[r as usize];
                    }
                }
            }
            let best: Vec<Option<Candidate>> = best.into_iter().zip(&stats).map(|(b, st)| self.resolve(b, st)).collect();

            // children in level order; `route[k]` = (left slot, candidate)
            let mut next = Vec::new();
            let mut route: Vec<Option<(u32, Candidate)>> = vec![None; width];
            for k in 0..width {
                let Some(c) = best[k] else { continue };
                if c.gain <= Self::tolerance(&stats[k]) {
                    continue;
                }
                let d = self.nodes[level[k]].depth + 1;
                let l = self.new_node(&Stats::default(), d);
                let r = self.new_node(&Stats::default(), d);
                self.nodes[level[k]].split = Some((c, l, r));
                route[k] = Some((next.len() as u32, c));
                next.push(l);
                next.push(r);
            }
            if next.is_empty() {
                break;
            }
            for r in 0..n {
                let s = slot[r];
                if s == NONE {
                    continue;
                }
                slot[r] = match route[s as usize] {
                    None => NONE,
                    Some((left, c)) => {
                        if self.data.features[c.feature].bins[r] <= c.bin {
                            left
                        } else {
                            left + 1
                        }
                    }
                };
            }
            // stable counting sort of every list by child slot
            let w = next.len();
            for (list, bounds) in lists.iter_mut().zip(seg.iter_mut()) {
                bounds.clear();
                bounds.resize(w + 1, 0);
                for &r in list.iter() {
                    let s = slot[r as usize];
                    if s != NONE {
                        bounds[s as usize + 1] += 1;
                    }
                }
                for k in 0..w {
                    bounds[k + 1] += bounds[k];
                }
                buf.clear();
                buf.resize(bounds[w], 0);
                let mut fill = bounds.clone();
                for &r in list.iter() {
                    let s = slot[r as usize];
                    if s != NONE {
                        buf[fill[s as usize]] = r;
                        fill[s as usize] += 1;
                    }
                }
                std::mem::swap(list, &mut buf);
            }
            level = next;
            depth += 1;
        }
        self.finish()
    }

    /// Level-wise growth with one pass over each presorted feature per level.
    fn grow_scan(mut self, rng: &mut ChaCha8Rng) -> RegressionTree {
        let n = self.data.n_rows;
        let mut slot: Vec<u32> = (0..n).map(|r| if self.h[r] > 0.0 { 0 } else { NONE }).collect();
        let mut level: Vec<usize> = Vec::new();
        let mut depth = 0usize;
        loop {
            let width = if depth == 0 { 1 } else { level.len() };
            let mut stats = vec![Stats::default(); width];
            for r in 0..n {
                let s = slot[r];
                if s != NONE {
                    let st = &mut stats[s as usize];
                    st.g += self.g[r];
                    st.h += self.h[r];
                    st.sq += self.g[r] * self.g[r] / self.h[r];
                    st.count += 1;
                }
            }
            if depth == 0 {
                level.push(self.new_node(&stats[0], 0));
            } else {
                for (k, &id) in level.iter().enumerate() {
                    self.nodes[id].value = -stats[k].g / (stats[k].h + self.cfg.lambda);
                    self.nodes[id].samples = stats[k].h;
                }
            }
            let eligible: Vec<bool> = stats.iter().map(|st| self.splittable(st, depth)).collect();
            if !eligible.iter().any(|&e| e) {
                break;
            }
            let masks: Vec<Option<Vec<bool>>> =
                eligible.iter().map(|&e| if e { self.draw_mask(rng) } else { None }).collect();
            let p = self.allowed.len();
            let mut usable = vec![false; p * width];
            for (s, mask) in masks.iter().enumerate() {
                if !eligible[s] {
                    continue;
                }
                for fs in 0..p {
                    usable[fs * width + s] = mask.as_ref().is_none_or(|m| m[fs]);
                }
            }
            let mut best: Vec<Option<Best>> = vec![None; width];
            let mut cur_bin = vec![NONE; width];
            let mut bin_g = vec![0.0; width];
            let mut bin_h = vec![0.0; width];
            let mut gl = vec![0.0; width];
            let mut hl = vec![0.0; width];
            let mut mc = vec![0usize; width];
            for (fs, &f) in self.allowed.iter().enumerate() {
                let use_f = &usable[fs * width..(fs + 1) * width];
                if !use_f.iter().any(|&u| u) {
                    continue;
                }
                let feat = &self.data.features[f];
                gl.iter_mut().for_each(|v| *v = 0.0);
                hl.iter_mut().for_each(|v| *v = 0.0);
                if let Some((mb, mrows)) = &feat.minority {
                    mc.iter_mut().for_each(|v| *v = 0);
                    for &r in mrows {
                        let s = slot[r as usize];
                        if s == NONE {
                            continue;
                        }
                        let s = s as usize;
                        gl[s] += self.g[r as usize];
                        hl[s] += self.h[r as usize];
                        mc[s] += 1;
                    }
                    for s in 0..width {
                        if use_f[s] {
                            self.consider_binary(&mut best[s], &stats[s], *mb, gl[s], hl[s], mc[s], fs);
                        }
                    }
                    continue;
                }
                cur_bin.iter_mut().for_each(|b| *b = NONE);
                for &r in &feat.sorted {
                    let s = slot[r as usize];
                    if s == NONE || !use_f[s as usize] {
                        continue;
                    }
                    let s = s as usize;
                    let b = feat.bins[r as usize];
                    if b != cur_bin[s] {
                        if cur_bin[s] != NONE {
                            gl[s] += bin_g[s];
                            hl[s] += bin_h[s];
                            self.consider(&mut best[s], &stats[s], gl[s], hl[s], fs, cur_bin[s], b);
                        }
                        cur_bin[s] = b;
                        bin_g[s] = 0.0;
                        bin_h[s] = 0.0;
                    }
                    bin_g[s] += self.g[r as usize];
                    bin_h[s] += self.h[r as usize];
                }
            }
            let best: Vec<Option<Candidate>> = best.into_iter().zip(&stats).map(|(b, st)| self.resolve(b, st)).collect();
            let mut next = Vec::new();
            let mut route: Vec<Option<(u32, Candidate)>> = vec![None; width];
            for k in 0..width {
                let Some(c) = best[k] else { continue };
                if c.gain <= Self::tolerance(&stats[k]) {
                    continue;
                }
                let d = self.nodes[level[k]].depth + 1;
                let l = self.new_node(&Stats::default(), d);
                let r = self.new_node(&Stats::default(), d);
                self.nodes[level[k]].split = Some((c, l, r));
                route[k] = Some((next.len() as u32, c));
                next.push(l);
                next.push(r);
            }
            if next.is_empty() {
                break;
            }
            for r in 0..n {
                let s = slot[r];
                if s == NONE {
                    continue;
                }
                slot[r] = match route[s as usize] {
                    None => NONE,
                    Some((left, c)) => {
                        if self.data.features[c.feature].bins[r] <= c.bin {
                            left
                        } else {
                            left + 1
                        }
                    }
                };
            }
            level = next;
            depth += 1;
        }
        self.finish()
    }

    fn node_stats(&self, rows: &[u32]) -> Stats {
        let mut st = Stats::default();
        for &r in rows {
            let r = r as usize;
            st.g += self.g[r];
            st.h += self.h[r];
            st.sq += self.g[r] * self.g[r] / self.h[r];
            st.count += 1;
        }
        st
    }

    fn best_histogram(&self, node: usize, rows: &[u32], node_of: &[usize], st: &Stats, mask: Option<&[bool]>) -> Option<Candidate> {
        let mut best: Option<Best> = None;
        let mut hg = Vec::new();
        let mut hh = Vec::new();
        let mut hc: Vec<u32> = Vec::new();
        for (fs, &f) in self.allowed.iter().enumerate() {
            if mask.is_some_and(|m| !m[fs]) {
                continue;
            }
            let feat = &self.data.features[f];
            if let Some((mb, mrows)) = &feat.minority {
                // either walk gives the same rows in ascending order
                let (mut g, mut h, mut c) = (0.0, 0.0, 0usize);
                if rows.len() <= mrows.len() {
                    for &r in rows {
                        if feat.bins[r as usize] == *mb {
                            g += self.g[r as usize];
                            h += self.h[r as usize];
                            c += 1;
                        }
                    }
                } else {
                    for &r in mrows {
                        if node_of[r as usize] == node {
                            g += self.g[r as usize];
                            h += self.h[r as usize];
                            c += 1;
                        }
                    }
                }
                self.consider_binary(&mut best, st, *mb, g, h, c, fs);
                continue;
            }
            let nb = feat.n_bins();
            hg.clear();
            hg.resize(nb, 0.0);
            hh.clear();
            hh.resize(nb, 0.0);
            hc.clear();
            hc.resize(nb, 0);
            for &r in rows {
                let b = feat.bins[r as usize] as usize;
                hg[b] += self.g[r as usize];
                hh[b] += self.h[r as usize];
                hc[b] += 1;
            }
            let (mut gl, mut hl) = (0.0, 0.0);
            let mut prev: Option<usize> = None;
            for b in 0..nb {
                if hc[b] == 0 {
                    continue;
                }
                if let Some(p) = prev {
                    gl += hg[p];
                    hl += hh[p];
                    self.consider(&mut best, st, gl, hl, fs, p as u32, b as u32);
                }
                prev = Some(b);
            }
        }
        self.resolve(best, st)
    }

    /// Best-first growth over explicit row lists with per-node histograms.
    fn grow_histogram(mut self, rng: &mut ChaCha8Rng) -> RegressionTree {
        let rows: Vec<u32> = (0..self.data.n_rows as u32).filter(|&r| self.h[r as usize] > 0.0).collect();
        // (node id, rows, stats, best split)
        let mut open: Vec<(usize, Vec<u32>, Stats, Option<Candidate>)> = Vec::new();
        let st = self.node_stats(&rows);
        let root = self.new_node(&st, 0);
        let mut node_of = vec![usize::MAX; self.data.n_rows];
        for &r in &rows {
            node_of[r as usize] = root;
        }
        let cand = self.search(root, &rows, &node_of, &st, 0, rng);
        open.push((root, rows, st, cand));
        let mut leaves = 1usize;
        while leaves < self.cfg.max_leaves {
            let pick = match self.cfg.growth {
                Growth::DepthWise => open.iter().position(|o| o.3.is_some()),
                Growth::LeafWise => {
                    let mut pick: Option<usize> = None;
                    for (k, o) in open.iter().enumerate() {
                        if let Some(c) = o.3 {
                            if pick.is_none_or(|p| c.gain > open[p].3.expect("candidate").gain) {
                                pick = Some(k);
                            }
                        }
                    }
                    pick
                }
            };
            let Some(k) = pick else { break };
            let (id, rows, _, cand) = open.remove(k);
            let c = cand.expect("picked candidate");
            let bins = &self.data.features[c.feature].bins;
            let (lrows, rrows): (Vec<u32>, Vec<u32>) = rows.iter().partition(|&&r| bins[r as usize] <= c.bin);
            let depth = self.nodes[id].depth + 1;
            let lst = self.node_stats(&lrows);
            let rst = self.node_stats(&rrows);
            let l = self.new_node(&lst, depth);
            let r = self.new_node(&rst, depth);
            self.nodes[id].split = Some((c, l, r));
            for &row in &lrows {
                node_of[row as usize] = l;
            }
            for &row in &rrows {
                node_of[row as usize] = r;
            }
            let lc = self.search(l, &lrows, &node_of, &lst, depth, rng);
            let rc = self.search(r, &rrows, &node_of, &rst, depth, rng);
            open.push((l, lrows, lst, lc));
            open.push((r, rrows, rst, rc));
            leaves += 1;
        }
        self.finish()
    }

    fn search(&self, node: usize, rows: &[u32], node_of: &[usize], st: &Stats, depth: usize, rng: &mut ChaCha8Rng) -> Option<Candidate> {
        if !self.splittable(st, depth) {
            return None;
        }
        let mask = self.draw_mask(rng);
        self.best_histogram(node, rows, node_of, st, mask.as_deref()).filter(|c| c.gain > Self::tolerance(st))
    }
}

/// Grow one tree. Rows with `h == 0` are ignored.
pub(crate) fn grow(
    data: &BinnedMatrix,
    g: &[f64],
    h: &[f64],
    allowed: &[usize],
    cfg: &GrowConfig,
    rng: &mut ChaCha8Rng,
) -> RegressionTree {
    let grower = Grower { data, g, h, allowed, cfg, nodes: Vec::new() };
    if cfg.histogram {
        grower.grow_histogram(rng)
    } else {
        if cfg.node_features.is_some() {
            grower.grow_scan_partitioned(rng)
        } else {
            grower.grow_scan(rng)
        }
    }
}

/// A single CART regression tree on squared error.
pub fn fit_tree(x: &DMatrix<f64>, y: &[f64], params: &TreeParams) -> Result<RegressionTree> {
    check_finite(x, y)?;
    validate_tree_params(params.min_samples_leaf)?;
    let data = BinnedMatrix::new(x, None);
    let g: Vec<f64> = y.iter().map(|v| -v).collect();
    let h = vec![1.0; y.len()];
    let cfg = GrowConfig::new(params.max_depth, params.min_samples_leaf, 0.0);
    let mut rng = rand::SeedableRng::seed_from_u64(0);
    Ok(grow(&data, &g, &h, &data.active, &cfg, &mut rng))
}

pub(crate) fn validate_tree_params(min_samples_leaf: f64) -> Result<()> {
    if !(min_samples_leaf >= 1.0 && min_samples_leaf.is_finite()) {
        return Err(LearnError::InvalidParam(format!("min_samples_leaf must be >= 1, got {min_samples_leaf}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn constant_target_single_leaf() {
        let x = col(&[1.0, 2.0, 3.0, 4.0]);
        let t = fit_tree(&x, &[5.0; 4], &TreeParams::default()).unwrap();
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.nodes[0].value, 5.0);
        assert_eq!(t.nodes[0].samples, 4.0);
    }

    #[test]
    fn step_function_one_split() {
        let x = col(&[1.0, 2.0, 3.0, 4.0]);
        let t = fit_tree(&x, &[0.0, 0.0, 1.0, 1.0], &TreeParams::default()).unwrap();
        assert_eq!(t.nodes.len(), 3);
        let s = t.nodes[0].split.unwrap();
        assert!(s.threshold > 2.0 && s.threshold < 3.0);
        assert_eq!(t.nodes[s.left].value, 0.0);
        assert_eq!(t.nodes[s.right].value, 1.0);
        t.validate().unwrap();
    }

    #[test]
    fn deeper_trees_fit_better() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 / 10.0).collect();
        let y: Vec<f64> = xs.iter().map(|v| v * v).collect();
        let x = col(&xs);
        let mse = |d| {
            let t = fit_tree(&x, &y, &TreeParams { max_depth: d, min_samples_leaf: 1.0 }).unwrap();
            let p = t.predict(&x).unwrap();
            p.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / 100.0
        };
        let (m1, m2, m3) = (mse(1), mse(2), mse(3));
        assert!(m1 > m2 && m2 > m3, "{m1} {m2} {m3}");
    }

    #[test]
    fn ties_pick_lowest_feature() {
        // both columns separate the target identically
        let x = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
        let t = fit_tree(&x, &[0.0, 0.0, 1.0, 1.0], &TreeParams::default()).unwrap();
        assert_eq!(t.nodes[0].split.unwrap().feature, 0);
        assert_eq!(t.nodes[0].split.unwrap().threshold, 0.5);
    }

    #[test]
    fn min_samples_leaf_respected() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = xs.iter().map(|v| (v * 1.7).sin()).collect();
        let t = fit_tree(&col(&xs), &y, &TreeParams { max_depth: 0, min_samples_leaf: 3.0 }).unwrap();
        assert!(t.leaves().all(|n| n.samples >= 3.0));
        t.validate().unwrap();
    }

    #[test]
    fn scan_and_histogram_finders_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (n, p) = (200, 5);
        let x = DMatrix::from_fn(n, p, |_, j| if j == 0 { rng.random_range(0..4) as f64 } else { rng.random::<f64>() });
        let y: Vec<f64> = (0..n).map(|i| x[(i, 0)] * 2.0 + x[(i, 1)] - x[(i, 2)] * 3.0).collect();
        let data = BinnedMatrix::new(&x, None);
        let g: Vec<f64> = y.iter().map(|v| -v).collect();
        let h = vec![1.0; n];
        let mut cfg = GrowConfig::new(5, 2.0, 0.0);
        let a = grow(&data, &g, &h, &data.active, &cfg, &mut ChaCha8Rng::seed_from_u64(0));
        cfg.histogram = true;
        let b = grow(&data, &g, &h, &data.active, &cfg, &mut ChaCha8Rng::seed_from_u64(0));
        cfg.growth = Growth::LeafWise;
        let c = grow(&data, &g, &h, &data.active, &cfg, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!(a.nodes.len() > 15);
    }

    #[test]
    fn validate_rejects_bad_counts() {
        let mut t = fit_tree(&col(&[1.0, 2.0, 3.0, 4.0]), &[0.0, 0.0, 1.0, 1.0], &TreeParams::default()).unwrap();
        t.nodes[1].samples = 7.0;
        assert!(t.validate().is_err());
    }

    #[test]
    fn width_checked() {
        let t = RegressionTree::leaf(1.0, 1.0, 3);
        assert!(t.predict(&DMatrix::zeros(2, 2)).is_err());
        assert_eq!(t.predict(&DMatrix::zeros(0, 2)).unwrap(), Vec::<f64>::new());
    }
}
