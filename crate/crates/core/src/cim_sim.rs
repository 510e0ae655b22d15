//! Behavioral model of the crossbar pair and WTA trees.
//!
//! Each stored bit is one cell; a payoff entry `v ≤ t` occupies a group of
//! `t` adjacent cells holding `v` ones then `t - v` zeros. Every matrix
//! element is replicated over an `I × I` block of such groups, so the crossbar
//! for an `n × m` matrix has `(I·n)` rows and `(I·t·m)` columns. Driving the
//! first `c_p[i]` rows of row-group `i` and the first `c_q[j]` column
//! sub-groups of column-group `j` makes that block conduct
//! `c_p[i]·c_q[j]·M_ij` unit currents.
//!
//! Device spread is a multiplicative per-cell factor `~ Normal(1, σ)`,
//! clipped at zero and frozen when the array is programmed. Optional read
//! noise is an independent per-cell Gaussian drawn on every read; it is
//! sampled in aggregate per sense line (a sum of independent Gaussians is
//! Gaussian with the summed variance), which keeps reads `O(n·m)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::annealer::{Backend, MaxTerms, VmvTerms};
use crate::error::{dim_err, Error, Result};
use crate::game::{BimatrixGame, PayoffMatrix};
use crate::lattice::QuantizedProfile;

/// Largest simulated array, in cells.
pub const MAX_CELLS: usize = 1 << 24;

/// Latency of one 2-input WTA cell, in nanoseconds.
pub const WTA_CELL_LATENCY_NS: f64 = 0.08;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossbarConfig {
    #[serde(rename = "interval_I")]
    pub intervals: u32,
    /// Cells per payoff element; `0` means "use the largest stored entry".
    #[serde(rename = "cells_per_element_t")]
    pub cells_per_element: u32,
    pub cell_sigma: f64,
    pub wta_offset: f64,
    /// Uniform ADC levels over each sense line's full scale; `0` is ideal.
    pub adc_levels: u32,
    pub read_noise_sigma: f64,
    pub t_read_ns: f64,
    pub t_logic_ns: f64,
    pub seed: u64,
}

impl Default for CrossbarConfig {
    fn default() -> Self {
        Self {
            intervals: 12,
            cells_per_element: 0,
            cell_sigma: 0.08,
            wta_offset: 0.0025,
            adc_levels: 0,
            read_noise_sigma: 0.0,
            t_read_ns: 10.0,
            t_logic_ns: 1.0,
            seed: 0,
        }
    }
}

impl CrossbarConfig {
    /// All noise sources off.
    pub fn noiseless(intervals: u32) -> Self {
        Self { intervals, cell_sigma: 0.0, wta_offset: 0.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.intervals == 0 {
            return Err(Error::Input("interval_I must be at least 1".into()));
        }
        let finite_nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::Input(format!("{name} must be finite and nonnegative, got {v}")))
            }
        };
        finite_nonneg("cell_sigma", self.cell_sigma)?;
        finite_nonneg("wta_offset", self.wta_offset)?;
        finite_nonneg("read_noise_sigma", self.read_noise_sigma)?;
        finite_nonneg("t_read_ns", self.t_read_ns)?;
        finite_nonneg("t_logic_ns", self.t_logic_ns)?;
        if self.adc_levels == 1 {
            return Err(Error::Input("adc_levels must be 0 (ideal) or at least 2".into()));
        }
        Ok(())
    }

    pub fn timing(&self) -> Timing {
        Timing { t_read_ns: self.t_read_ns, t_logic_ns: self.t_logic_ns }
    }

    /// `t` for a game: the configured value, or the largest entry (at least 1).
    pub fn resolved_cells(&self, game: &BimatrixGame) -> u32 {
        if self.cells_per_element == 0 {
            u32::try_from(game.max_entry().max(1)).unwrap_or(u32::MAX)
        } else {
            self.cells_per_element
        }
    }
}

/// One programmed array with frozen device spread.
#[derive(Debug, Clone)]
pub struct ProgrammedCrossbar {
    stored: PayoffMatrix,
    intervals: usize,
    cells_per_element: usize,
    /// Row-major `(I·n) × (I·t·m)` cell states.
    cells: Vec<bool>,
    /// Per-cell current multiplier (1.0 when noiseless).
    gain: Vec<f64>,
    /// Per `(i, j)` block, 2-D prefix sums over `(row a, sub-group b)` of
    /// ON-cell current, shape `(I+1) × (I+1)`.
    block_sum: Vec<Vec<f64>>,
    /// Same for squared current, for read-noise variance.
    block_sq: Vec<Vec<f64>>,
}

impl ProgrammedCrossbar {
    pub fn program<R: Rng + ?Sized>(
        stored: &PayoffMatrix,
        intervals: u32,
        cells_per_element: u32,
        cell_sigma: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let t = cells_per_element as usize;
        if let Some(v) = (stored.max_entry() > i64::from(cells_per_element)).then(|| stored.max_entry()) {
            return Err(Error::Capacity(format!("entry {v} needs more than t = {t} cells")));
        }
        if t == 0 {
            return Err(Error::Capacity("t must be at least 1".into()));
        }
        let big_i = intervals as usize;
        let (n, m) = (stored.rows(), stored.cols());
        let rows = big_i * n;
        let cols = big_i * t * m;
        if rows.checked_mul(cols).is_none_or(|total| total > MAX_CELLS) {
            return Err(Error::Capacity(format!("{rows} x {cols} array exceeds {MAX_CELLS} simulated cells")));
        }
        let mut cells = vec![false; rows * cols];
        let mut gain = vec![1.0; rows * cols];
        let normal = (cell_sigma > 0.0).then(|| Normal::new(1.0, cell_sigma).expect("valid sigma"));
        for r in 0..rows {
            let i = r / big_i;
            for c in 0..cols {
                let j = c / (big_i * t);
                let k = c % t;
                cells[r * cols + c] = (k as i64) < stored.get(i, j);
                if let Some(d) = &normal {
                    gain[r * cols + c] = d.sample(rng).max(0.0);
                }
            }
        }
        let mut xb = Self {
            stored: stored.clone(),
            intervals: big_i,
            cells_per_element: t,
            cells,
            gain,
            block_sum: Vec::new(),
            block_sq: Vec::new(),
        };
        xb.build_prefix_sums();
        Ok(xb)
    }

    fn build_prefix_sums(&mut self) {
        let (n, m, big_i, t) = (self.stored.rows(), self.stored.cols(), self.intervals, self.cells_per_element);
        let stride = big_i + 1;
        for i in 0..n {
            for j in 0..m {
                let mut s = vec![0.0; stride * stride];
                let mut s2 = vec![0.0; stride * stride];
                for a in 0..big_i {
                    let r = i * big_i + a;
                    for b in 0..big_i {
                        let mut cur = 0.0;
                        let mut sq = 0.0;
                        for k in 0..t {
                            let c = (j * big_i + b) * t + k;
                            if self.cell(r, c) {
                                let g = self.gain(r, c);
                                cur += g;
                                sq += g * g;
                            }
                        }
                        let at = (a + 1) * stride + (b + 1);
                        s[at] = cur + s[a * stride + b + 1] + s[(a + 1) * stride + b] - s[a * stride + b];
                        s2[at] = sq + s2[a * stride + b + 1] + s2[(a + 1) * stride + b] - s2[a * stride + b];
                    }
                }
                self.block_sum.push(s);
                self.block_sq.push(s2);
            }
        }
    }

    pub fn stored(&self) -> &PayoffMatrix {
        &self.stored
    }

    /// Grid shape `(I·n, I·t·m)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.intervals * self.stored.rows(), self.intervals * self.cells_per_element * self.stored.cols())
    }

    pub fn cell(&self, r: usize, c: usize) -> bool {
        self.cells[r * self.dims().1 + c]
    }

    pub fn gain(&self, r: usize, c: usize) -> f64 {
        self.gain[r * self.dims().1 + c]
    }

    /// Current on column `c` when its first `active_rows` rows are driven.
    pub fn column_current(&self, c: usize, active_rows: usize) -> f64 {
        (0..active_rows).filter(|&r| self.cell(r, c)).map(|r| self.gain(r, c)).sum()
    }

    /// Current and squared-current sums of block `(i, j)` with `a` rows and `b`
    /// column sub-groups driven.
    #[inline]
    fn block(&self, i: usize, j: usize, a: u32, b: u32) -> (f64, f64) {
        let idx = i * self.stored.cols() + j;
        let at = a as usize * (self.intervals + 1) + b as usize;
        (self.block_sum[idx][at], self.block_sq[idx][at])
    }

    fn check_drive(&self, rows: &[u32], cols: &[u32]) -> Result<()> {
        if rows.len() != self.stored.rows() {
            return Err(dim_err("row drive", self.stored.rows(), rows.len()));
        }
        if cols.len() != self.stored.cols() {
            return Err(dim_err("column drive", self.stored.cols(), cols.len()));
        }
        let ok = |v: &[u32]| v.iter().map(|&x| x as usize).sum::<usize>() == self.intervals;
        if !ok(rows) || !ok(cols) {
            return Err(Error::Lattice(format!(
                "drive counts must sum to I = {} (rows {rows:?}, cols {cols:?})",
                self.intervals
            )));
        }
        Ok(())
    }

    /// Matrix-vector read: all rows driven, column sub-groups driven by
    /// `col_counts`. Returns one sense current per row-group (noiseless value
    /// `I·Σ_j c_j·A_ij` unit currents) with its read-noise variance factor.
    fn read_mv(&self, col_counts: &[u32]) -> Vec<(f64, f64)> {
        let big_i = self.intervals as u32;
        (0..self.stored.rows())
            .map(|i| {
                (0..self.stored.cols())
                    .map(|j| self.block(i, j, big_i, col_counts[j]))
                    .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d))
            })
            .collect()
    }

    /// Vector-matrix-vector read: total current with `row_counts` rows and
    /// `col_counts` column sub-groups driven.
    fn read_vmv(&self, row_counts: &[u32], col_counts: &[u32]) -> (f64, f64) {
        let mut cur = 0.0;
        let mut sq = 0.0;
        for (i, &a) in row_counts.iter().enumerate() {
            for (j, &b) in col_counts.iter().enumerate() {
                let (c, s) = self.block(i, j, a, b);
                cur += c;
                sq += s;
            }
        }
        (cur, sq)
    }
}

/// Program the `M` and `Nᵀ` arrays for a game.
pub fn program(game: &BimatrixGame, cfg: &CrossbarConfig) -> Result<(ProgrammedCrossbar, ProgrammedCrossbar)> {
    cfg.validate()?;
    let t = cfg.resolved_cells(game);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let xm = ProgrammedCrossbar::program(game.row_payoffs(), cfg.intervals, t, cfg.cell_sigma, &mut rng)?;
    let xn = ProgrammedCrossbar::program(&game.col_payoffs().transpose(), cfg.intervals, t, cfg.cell_sigma, &mut rng)?;
    Ok((xm, xn))
}

/// Binary tree of 2-input max cells over `D` inputs; `2^K - 1` cells for
/// `K = ⌈log2 D⌉`, leaves beyond `D` tied to zero current.
#[derive(Debug, Clone, PartialEq)]
pub struct WtaTree {
    inputs: usize,
    depth: u32,
    /// Relative output error of each cell, level by level from the leaves.
    offsets: Vec<f64>,
}

impl WtaTree {
    pub fn new<R: Rng + ?Sized>(inputs: usize, offset_bound: f64, rng: &mut R) -> Result<Self> {
        if inputs == 0 {
            return Err(Error::Input("WTA tree needs at least one input".into()));
        }
        let depth = ceil_log2(inputs);
        let cells = (1usize << depth) - 1;
        let offsets = (0..cells)
            .map(|_| if offset_bound > 0.0 { rng.random_range(-offset_bound..=offset_bound) } else { 0.0 })
            .collect();
        Ok(Self { inputs, depth, offsets })
    }

    pub fn ideal(inputs: usize) -> Result<Self> {
        Self::new(inputs, 0.0, &mut ChaCha8Rng::seed_from_u64(0))
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn cell_count(&self) -> usize {
        self.offsets.len()
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }
}

pub fn ceil_log2(d: usize) -> u32 {
    if d <= 1 {
        0
    } else {
        usize::BITS - (d - 1).leading_zeros()
    }
}

/// One cell. The circuit forms `min(a, b) + |a - b|`, which is `max(a, b)`;
/// the max is taken directly so an ideal cell adds no rounding.
#[inline]
fn wta_cell(a: f64, b: f64, offset: f64) -> f64 {
    a.max(b) * (1.0 + offset)
}

/// Maximum of `currents` through the tree.
pub fn wta_max(currents: &[f64], tree: &WtaTree) -> Result<f64> {
    if currents.is_empty() {
        return Err(Error::Input("WTA input is empty".into()));
    }
    if currents.len() != tree.inputs {
        return Err(dim_err("WTA inputs", tree.inputs, currents.len()));
    }
    if let Some(bad) = currents.iter().find(|c| c.is_nan() || **c < 0.0) {
        return Err(Error::Input(format!("WTA currents must be nonnegative, got {bad}")));
    }
    let mut level: Vec<f64> = currents.to_vec();
    level.resize(1 << tree.depth, 0.0);
    let mut cell = 0;
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| {
                let out = wta_cell(pair[0], pair[1], tree.offsets[cell]);
                cell += 1;
                out
            })
            .collect();
    }
    Ok(level[0])
}

/// Read and logic latencies of the timing model, in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub t_read_ns: f64,
    pub t_logic_ns: f64,
}

impl Default for Timing {
    fn default() -> Self {
        CrossbarConfig::default().timing()
    }
}

/// Seconds modeled for `iterations` annealing steps: each step is two array
/// reads, one pass through a WTA tree of depth `wta_depth`, and the logic
/// update. Reporting only; absolute values depend on the assumed latencies.
pub fn modeled_time(iterations: u64, wta_depth: u32, timing: &Timing) -> f64 {
    iterations as f64 * per_iteration_ns(wta_depth, timing) * 1e-9
}

pub fn per_iteration_ns(wta_depth: u32, timing: &Timing) -> f64 {
    2.0 * timing.t_read_ns + f64::from(wta_depth) * WTA_CELL_LATENCY_NS + timing.t_logic_ns
}

/// Objective backend backed by the crossbar model.
#[derive(Debug, Clone)]
pub struct CimBackend {
    cfg: CrossbarConfig,
    xbar_m: ProgrammedCrossbar,
    xbar_nt: ProgrammedCrossbar,
    wta_m: WtaTree,
    wta_n: WtaTree,
    read_rng: ChaCha8Rng,
}

impl CimBackend {
    /// Programs both arrays and builds the trees from `cfg.seed`; read noise
    /// draws come from `read_seed`.
    pub fn new(game: &BimatrixGame, cfg: &CrossbarConfig, read_seed: u64) -> Result<Self> {
        let (xbar_m, xbar_nt) = program(game, cfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5754_4153_5452_4545);
        let wta_m = WtaTree::new(game.n(), cfg.wta_offset, &mut rng)?;
        let wta_n = WtaTree::new(game.m(), cfg.wta_offset, &mut rng)?;
        Ok(Self { cfg: cfg.clone(), xbar_m, xbar_nt, wta_m, wta_n, read_rng: ChaCha8Rng::seed_from_u64(read_seed) })
    }

    pub fn crossbars(&self) -> (&ProgrammedCrossbar, &ProgrammedCrossbar) {
        (&self.xbar_m, &self.xbar_nt)
    }

    pub fn config(&self) -> &CrossbarConfig {
        &self.cfg
    }

    fn check(&self, prof: &QuantizedProfile) -> Result<()> {
        if prof.intervals() != self.cfg.intervals {
            return Err(Error::Lattice(format!(
                "profile uses I = {}, crossbar is programmed for I = {}",
                prof.intervals(),
                self.cfg.intervals
            )));
        }
        self.xbar_m.check_drive(prof.p.counts(), prof.q.counts())?;
        self.xbar_nt.check_drive(prof.q.counts(), prof.p.counts())
    }

    /// Apply read noise then the ADC to one sense value.
    fn sense(&mut self, value: f64, sq: f64, full_scale: f64) -> f64 {
        let mut v = value;
        if self.cfg.read_noise_sigma > 0.0 && sq > 0.0 {
            let z: f64 = StandardNormal.sample(&mut self.read_rng);
            v += self.cfg.read_noise_sigma * sq.sqrt() * z;
        }
        quantize_adc(v.max(0.0), full_scale, self.cfg.adc_levels)
    }

    /// Phase 1: `(max(Mq), max(Nᵀp))` estimates.
    pub fn phase1(&mut self, prof: &QuantizedProfile) -> Result<(f64, f64)> {
        self.check(prof)?;
        let big_i = f64::from(self.cfg.intervals);
        let scale = big_i * big_i;
        let full = scale * self.xbar_m.cells_per_element as f64;
        let lines_m = self.xbar_m.read_mv(prof.q.counts());
        let lines_n = self.xbar_nt.read_mv(prof.p.counts());
        let sensed_m: Vec<f64> = lines_m.into_iter().map(|(v, s)| self.sense(v, s, full)).collect();
        let sensed_n: Vec<f64> = lines_n.into_iter().map(|(v, s)| self.sense(v, s, full)).collect();
        Ok((wta_max(&sensed_m, &self.wta_m)? / scale, wta_max(&sensed_n, &self.wta_n)? / scale))
    }

    /// Phase 2: `(pᵀMq, pᵀNq)` estimates.
    pub fn phase2(&mut self, prof: &QuantizedProfile) -> Result<(f64, f64)> {
        self.check(prof)?;
        let big_i = f64::from(self.cfg.intervals);
        let full = big_i * big_i * self.xbar_m.cells_per_element as f64;
        let (cm, sm) = self.xbar_m.read_vmv(prof.p.counts(), prof.q.counts());
        let (cn, sn) = self.xbar_nt.read_vmv(prof.q.counts(), prof.p.counts());
        let vm = self.sense(cm, sm, full);
        let vn = self.sense(cn, sn, full);
        Ok((vm / (big_i * big_i), vn / (big_i * big_i)))
    }

    pub fn wta_depth(&self) -> u32 {
        self.wta_m.depth.max(self.wta_n.depth)
    }
}

/// Uniform quantizer with `levels` steps over `[0, full_scale]`; `0` levels
/// passes the value through.
pub fn quantize_adc(v: f64, full_scale: f64, levels: u32) -> f64 {
    if levels < 2 || full_scale <= 0.0 {
        return v;
    }
    let step = full_scale / f64::from(levels - 1);
    ((v / step).round() * step).clamp(0.0, full_scale)
}

impl Backend for CimBackend {
    type Value = f64;

    fn phase1(&mut self, prof: &QuantizedProfile) -> Result<MaxTerms<f64>> {
        let (alpha, beta) = CimBackend::phase1(self, prof)?;
        Ok(MaxTerms { alpha, beta })
    }

    fn phase2(&mut self, prof: &QuantizedProfile) -> Result<VmvTerms<f64>> {
        let (vmv_m, vmv_n) = CimBackend::phase2(self, prof)?;
        Ok(VmvTerms { vmv_m, vmv_n })
    }

    fn wta_depth(&self) -> u32 {
        CimBackend::wta_depth(self)
    }
}
