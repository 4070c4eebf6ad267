//! Four-signature evaluation of corpora and generator batteries.
//!
//! Sig1: end-to-start rate inside a band. Sig2: bilateral positional
//! extremity. Sig3: cross-boundary mutual information above a floor.
//! Sig4: Zipfian boundary distribution.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::generators::{
    grille, naibbe, slot, Ablation, GrilleConfig, GrilleMode, KvConfig, NaibbeConfig, SlotConfig,
    Specialization,
};
use crate::positional::{self, Position, Shape};
use crate::seed;
use crate::stats::{self, Bootstrap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignatureThresholds {
    pub sig1_low: f64,
    pub sig1_high: f64,
    pub sig2_run_fraction: f64,
    pub sig3_min_mi: f64,
    pub sig4_r2: f64,
    pub sig4_cv: f64,
}

impl Default for SignatureThresholds {
    fn default() -> Self {
        SignatureThresholds {
            sig1_low: 70.0,
            sig1_high: 95.0,
            sig2_run_fraction: 0.5,
            sig3_min_mi: 0.10,
            sig4_r2: positional::ZIPF_R2,
            sig4_cv: positional::ZIPF_CV,
        }
    }
}

impl SignatureThresholds {
    pub fn from_kv(mut kv: KvConfig) -> Result<Self> {
        let mut t = SignatureThresholds::default();
        macro_rules! set {
            ($($k:ident),+) => { $(if let Some(v) = kv.take(stringify!($k))? { t.$k = v; })+ };
        }
        set!(sig1_low, sig1_high, sig2_run_fraction, sig3_min_mi, sig4_r2, sig4_cv);
        kv.finish()?;
        if t.sig1_low > t.sig1_high {
            return Err(Error::InvalidParameter("sig1_low exceeds sig1_high".into()));
        }
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_kv(KvConfig::load(path)?)
    }

    fn sig1(&self, e_to_s: f64) -> bool {
        (self.sig1_low..=self.sig1_high).contains(&e_to_s)
    }

    fn sig3(&self, mi: f64) -> bool {
        mi > self.sig3_min_mi
    }

    fn sig4(&self, r2: f64, cv: f64) -> bool {
        r2 > self.sig4_r2 && cv > self.sig4_cv
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureReport {
    pub e_to_s: f64,
    pub bilateral: bool,
    pub extreme_initial: usize,
    pub extreme_final: usize,
    pub mi: f64,
    pub shape: Shape,
    pub r_squared: f64,
    pub cv: f64,
    pub passes: [bool; 4],
    pub joint: usize,
}

impl SignatureReport {
    pub fn recompute_joint(&self) -> usize {
        self.passes.iter().filter(|&&p| p).count()
    }
}

/// Scores one corpus, classifying its graphemes on the corpus itself.
pub fn evaluate_corpus(c: &Corpus, th: &SignatureThresholds) -> Result<SignatureReport> {
    let pc = positional::classify(c, positional::DEFAULT_THRESHOLD);
    let e_to_s = positional::end_to_start_rate(c, &pc)?;
    let extremes = positional::extreme_ratios(&pc, positional::DEFAULT_EXTREME_RATIO);
    let extreme_initial = extremes.iter().filter(|e| e.side == positional::Side::Initial).count();
    let extreme_final = extremes.len() - extreme_initial;
    let bilateral = extreme_initial > 0 && extreme_final > 0;
    let mi = boundary::mutual_information(&boundary::extract_transitions(c, 1)?)?;
    let dist = positional::boundary_distribution(c, Position::Combined)?;
    let passes = [
        th.sig1(e_to_s),
        bilateral,
        th.sig3(mi),
        th.sig4(dist.r_squared, dist.cv),
    ];
    Ok(SignatureReport {
        e_to_s,
        bilateral,
        extreme_initial,
        extreme_final,
        mi,
        shape: dist.shape,
        r_squared: dist.r_squared,
        cv: dist.cv,
        passes,
        joint: passes.iter().filter(|&&p| p).count(),
    })
}

/// Observed values a battery is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub e_to_s: f64,
    pub mi: f64,
    pub r_squared: f64,
    pub cv: f64,
}

impl From<&SignatureReport> for Reference {
    fn from(r: &SignatureReport) -> Self {
        Reference {
            e_to_s: r.e_to_s,
            mi: r.mi,
            r_squared: r.r_squared,
            cv: r.cv,
        }
    }
}

impl Reference {
    /// Reads the signature record of an `analyze` report, or a bare
    /// signature record.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let record = v
            .pointer("/results/signatures")
            .or_else(|| v.get("signatures"))
            .cloned()
            .unwrap_or(v);
        serde_json::from_value(record).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Present,
    Marginal,
    Absent,
}

impl Verdict {
    /// Interval entirely inside the pass region, entirely outside, or across.
    fn from_interval(inside: bool, outside: bool) -> Verdict {
        if inside {
            Verdict::Present
        } else if outside {
            Verdict::Absent
        } else {
            Verdict::Marginal
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Present => "✓",
            Verdict::Marginal => "∼",
            Verdict::Absent => "×",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `(mean − reference) / sd`; absent without a reference or when the
    /// runs have no spread but differ from it.
    pub cohens_d: Option<f64>,
}

pub fn cohens_d(mean: f64, sd: f64, reference: f64) -> Option<f64> {
    if mean == reference {
        Some(0.0)
    } else if sd > 0.0 {
        Some((mean - reference) / sd)
    } else {
        None
    }
}

fn summarize(xs: &[f64], bs: &Bootstrap, reference: Option<f64>) -> MetricSummary {
    let mean = stats::mean(xs);
    let sd = stats::sd(xs);
    let (ci_low, ci_high) = if bs.replicates == 0 || xs.len() < 2 {
        (mean, mean)
    } else {
        stats::bootstrap_mean(xs, bs)
    };
    MetricSummary {
        mean,
        sd,
        ci_low,
        ci_high,
        cohens_d: reference.and_then(|r| cohens_d(mean, sd, r)),
    }
}

/// Anything that yields one corpus per seed.
#[derive(Debug, Clone)]
pub enum GeneratorSpec {
    Slot(SlotConfig),
    Grille(GrilleConfig),
    Naibbe { cfg: NaibbeConfig, plaintext: Arc<String> },
    /// The same corpus for every seed.
    Fixed(Arc<Corpus>),
}

impl GeneratorSpec {
    pub fn generate(&self, n_words: usize, seed: u64) -> Result<Corpus> {
        Ok(match self {
            GeneratorSpec::Slot(c) => slot::generate_slot_corpus(c, n_words, seed)?.corpus,
            GeneratorSpec::Grille(c) => grille::generate_grille_corpus(c, n_words, seed)?.corpus,
            GeneratorSpec::Naibbe { cfg, plaintext } => {
                naibbe::generate_naibbe_corpus(cfg, plaintext, n_words, seed)?.corpus
            }
            GeneratorSpec::Fixed(c) => (**c).clone(),
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GeneratorSpec::Slot(_) => "slot",
            GeneratorSpec::Grille(_) => "grille",
            GeneratorSpec::Naibbe { .. } => "naibbe",
            GeneratorSpec::Fixed(_) => "fixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryParams {
    pub runs: usize,
    pub words: usize,
    pub seed: u64,
    pub bootstrap: usize,
    pub thresholds: SignatureThresholds,
    pub reference: Option<Reference>,
}

impl Default for BatteryParams {
    fn default() -> Self {
        BatteryParams {
            runs: 20,
            words: 37_000,
            seed: 0,
            bootstrap: 1000,
            thresholds: SignatureThresholds::default(),
            reference: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryResult {
    pub label: String,
    pub runs: Vec<SignatureReport>,
    pub e_to_s: MetricSummary,
    pub mi: MetricSummary,
    pub r_squared: MetricSummary,
    pub cv: MetricSummary,
    pub sig2_fraction: MetricSummary,
    /// Shape implied by the mean fit statistics.
    pub shape: Shape,
    pub verdicts: [Verdict; 4],
    pub passes: [bool; 4],
    pub joint: usize,
}

impl BatteryResult {
    pub fn recompute_joint(&self) -> usize {
        self.passes.iter().filter(|&&p| p).count()
    }

    fn from_runs(label: &str, runs: Vec<SignatureReport>, p: &BatteryParams) -> BatteryResult {
        let th = &p.thresholds;
        let bs = Bootstrap::new(p.bootstrap, seed::derive_named(p.seed, "battery-ci"));
        let col = |f: fn(&SignatureReport) -> f64| runs.iter().map(f).collect::<Vec<f64>>();
        let r = p.reference;
        let e_to_s = summarize(&col(|x| x.e_to_s), &bs, r.map(|r| r.e_to_s));
        let mi = summarize(&col(|x| x.mi), &bs, r.map(|r| r.mi));
        let r_squared = summarize(&col(|x| x.r_squared), &bs, r.map(|r| r.r_squared));
        let cv = summarize(&col(|x| x.cv), &bs, r.map(|r| r.cv));
        let sig2_fraction = summarize(&col(|x| f64::from(u8::from(x.bilateral))), &bs, None);
        let passes = [
            th.sig1(e_to_s.mean),
            sig2_fraction.mean > th.sig2_run_fraction,
            th.sig3(mi.mean),
            th.sig4(r_squared.mean, cv.mean),
        ];
        let verdicts = [
            Verdict::from_interval(
                e_to_s.ci_low >= th.sig1_low && e_to_s.ci_high <= th.sig1_high,
                e_to_s.ci_high < th.sig1_low || e_to_s.ci_low > th.sig1_high,
            ),
            Verdict::from_interval(
                sig2_fraction.ci_low > th.sig2_run_fraction,
                sig2_fraction.ci_high <= th.sig2_run_fraction,
            ),
            Verdict::from_interval(mi.ci_low > th.sig3_min_mi, mi.ci_high <= th.sig3_min_mi),
            Verdict::from_interval(
                r_squared.ci_low > th.sig4_r2 && cv.ci_low > th.sig4_cv,
                r_squared.ci_high <= th.sig4_r2 || cv.ci_high <= th.sig4_cv,
            ),
        ];
        BatteryResult {
            label: label.to_string(),
            shape: positional::shape_of(r_squared.mean, cv.mean),
            e_to_s,
            mi,
            r_squared,
            cv,
            sig2_fraction,
            verdicts,
            passes,
            joint: passes.iter().filter(|&&p| p).count(),
            runs,
        }
    }
}

/// Generates and scores `p.runs` corpora with seeds derived from `p.seed`.
pub fn run_battery(label: &str, spec: &GeneratorSpec, p: &BatteryParams) -> Result<BatteryResult> {
    if p.runs == 0 {
        return Err(Error::InvalidParameter("a battery needs at least one run".into()));
    }
    let runs: Vec<SignatureReport> = (0..p.runs as u64)
        .into_par_iter()
        .map(|i| {
            let c = spec.generate(p.words, seed::derive(p.seed, i))?;
            evaluate_corpus(&c, &p.thresholds)
        })
        .collect::<Result<_>>()?;
    Ok(BatteryResult::from_runs(label, runs, p))
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub label: String,
    pub spec: GeneratorSpec,
}

impl SweepPoint {
    pub fn new(label: impl Into<String>, spec: GeneratorSpec) -> Self {
        SweepPoint {
            label: label.into(),
            spec,
        }
    }
}

/// One battery per grid point, in grid order. Every point reuses the same
/// master seed so grid points differ only by configuration.
pub fn sweep(grid: &[SweepPoint], p: &BatteryParams) -> Result<Vec<BatteryResult>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    grid.par_iter().map(|pt| run_battery(&pt.label, &pt.spec, p)).collect()
}

/// Interpretation matrix: one row per battery, verdict symbols per signature.
pub fn matrix_csv(results: &[BatteryResult], reference: Option<(&str, &SignatureReport)>) -> String {
    let mut out = String::from("configuration,sig1,sig2,sig3,sig4,joint\n");
    for r in results {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}/4",
            csv_field(&r.label),
            r.verdicts[0],
            r.verdicts[1],
            r.verdicts[2],
            r.verdicts[3],
            r.joint
        );
    }
    if let Some((name, rep)) = reference {
        let mark = |b: bool| if b { Verdict::Present } else { Verdict::Absent };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}/4",
            csv_field(name),
            mark(rep.passes[0]),
            mark(rep.passes[1]),
            mark(rep.passes[2]),
            mark(rep.passes[3]),
            rep.joint
        );
    }
    out
}

/// Sweep table: point estimates with bootstrap intervals.
pub fn sweep_csv(results: &[BatteryResult]) -> String {
    let mut out = String::from(
        "configuration,e_to_s,e_to_s_low,e_to_s_high,mi,mi_low,mi_high,r_squared,cv,shape,sig2_fraction,joint\n",
    );
    for r in results {
        let _ = writeln!(
            out,
            "{},{:.3},{:.3},{:.3},{:.4},{:.4},{:.4},{:.4},{:.4},{},{:.2},{}",
            csv_field(&r.label),
            r.e_to_s.mean,
            r.e_to_s.ci_low,
            r.e_to_s.ci_high,
            r.mi.mean,
            r.mi.ci_low,
            r.mi.ci_high,
            r.r_squared.mean,
            r.cv.mean,
            r.shape,
            r.sig2_fraction.mean,
            r.joint
        );
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// The twelve slot-generator ablation conditions.
pub fn slot_ablation_grid(base: &SlotConfig) -> Vec<SweepPoint> {
    Ablation::ALL
        .iter()
        .map(|&a| {
            SweepPoint::new(
                a.name(),
                GeneratorSpec::Slot(SlotConfig {
                    ablation: a,
                    ..base.clone()
                }),
            )
        })
        .collect()
}

/// The seven one-at-a-time slot sensitivity sweeps around `base`.
pub fn slot_sweep_grids(base: &SlotConfig) -> Vec<(&'static str, Vec<SweepPoint>)> {
    let pt = |label: String, f: &dyn Fn(&mut SlotConfig)| {
        let mut c = base.clone();
        f(&mut c);
        SweepPoint::new(label, GeneratorSpec::Slot(c))
    };
    vec![
        (
            "S1 pool overlap",
            [0.0, 0.25, 0.5, 0.75, 1.0]
                .iter()
                .map(|&v| pt(format!("pool_overlap={v}"), &|c| c.pool_overlap = v))
                .collect(),
        ),
        (
            "S2 slot count",
            [(1, 1), (2, 2), (3, 2), (3, 3), (4, 3)]
                .iter()
                .map(|&(p, s)| {
                    pt(format!("slots={p}+{s}"), &|c| {
                        c.n_prefix_slots = p;
                        c.n_suffix_slots = s;
                        // Small slot spaces cannot host the full lexicon.
                        c.vocab_size = c.vocab_size.min(slot_space_cap(c));
                    })
                })
                .collect(),
        ),
        (
            "S3 Zipf exponent",
            [0.0, 0.5, 1.0, 1.2, 1.5, 2.0, 2.5]
                .iter()
                .map(|&v| pt(format!("zipf_alpha={v}"), &|c| c.zipf_alpha = v))
                .collect(),
        ),
        (
            "S4 vocabulary size",
            {
                // Fractions of the distinct words the slot space can spell.
                let cap = slot_space_cap(base);
                [0.1, 0.25, 0.5, 0.75, 0.95]
                    .iter()
                    .map(|f| ((cap as f64 * f).round() as usize).max(1))
                    .map(|v| pt(format!("vocab_size={v}"), &|c| c.vocab_size = v))
                    .collect()
            },
        ),
        (
            "S5 boundary pair strength",
            [1.0, 1.5, 2.75, 4.0, 8.0]
                .iter()
                .map(|&v| pt(format!("boundary_pair_strength={v}"), &|c| c.boundary_pair_strength = v))
                .collect(),
        ),
        (
            "S6 bridge zone width",
            (0..=base.bridge_pool.len())
                .map(|v| pt(format!("bridge_zone={v}"), &|c| c.bridge_zone = v))
                .collect(),
        ),
        (
            "S7 Markov top-k",
            [1, 2, 5, 10, 50]
                .iter()
                .map(|&v| pt(format!("markov_top_k={v}"), &|c| c.markov_top_k = v))
                .collect(),
        ),
    ]
}

/// Distinct words the slot space can produce.
fn slot_space_cap(c: &SlotConfig) -> usize {
    let mut cap = usize::MAX / 2;
    loop {
        let probe = SlotConfig {
            vocab_size: cap,
            ..c.clone()
        };
        match slot::build_slot_lexicon(&probe, 0) {
            Err(Error::PoolExhausted { available, .. }) if (available as usize) < cap => {
                cap = available as usize
            }
            _ => return cap,
        }
    }
}

/// Split table, random mode, over a range of column skews.
pub fn grille_skew_grid(base: &GrilleConfig, alphas: &[f64]) -> Vec<SweepPoint> {
    alphas
        .iter()
        .map(|&a| {
            SweepPoint::new(
                format!("column_skew_alpha={a}"),
                GeneratorSpec::Grille(GrilleConfig {
                    column_skew_alpha: a,
                    specialization: Specialization::Split,
                    mode: GrilleMode::Random,
                    ..base.clone()
                }),
            )
        })
        .collect()
}

/// The five grille sensitivity sweeps: blank probability, hole count, table
/// columns, column skew and table rows.
pub fn grille_sweep_grids(base: &GrilleConfig) -> Vec<(&'static str, Vec<SweepPoint>)> {
    let pt = |label: String, f: &dyn Fn(&mut GrilleConfig)| {
        let mut c = base.clone();
        f(&mut c);
        SweepPoint::new(label, GeneratorSpec::Grille(c))
    };
    vec![
        (
            "blank probability",
            [0.0, 0.1, 0.2, 0.4, 0.6]
                .iter()
                .map(|&v| pt(format!("blank_prob={v}"), &|c| c.blank_prob = v))
                .collect(),
        ),
        (
            "hole count",
            [2, 3, 4, 5, 6]
                .iter()
                .map(|&v| pt(format!("n_holes={v}"), &|c| c.n_holes = v))
                .collect(),
        ),
        (
            "table columns",
            [6, 8, 10, 14, 20]
                .iter()
                .map(|&v| pt(format!("cols={v}"), &|c| c.cols = v))
                .collect(),
        ),
        ("column skew", grille_skew_grid(base, &[0.0, 0.5, 1.0, 1.5, 2.0])),
        (
            "table rows",
            [20, 50, 200, 1000]
                .iter()
                .map(|&v| pt(format!("rows={v}"), &|c| c.rows = v))
                .collect(),
        ),
    ]
}

/// Honest and circular grille configurations. Learned and row-sequential
/// rows need source corpora and are skipped when none is given.
pub fn grille_config_grid(
    base: &GrilleConfig,
    language_source: Option<Arc<Corpus>>,
    random_source: Option<Arc<Corpus>>,
) -> Vec<SweepPoint> {
    let g = |label: &str, s: Specialization, m: GrilleMode, f: &dyn Fn(&mut GrilleConfig)| {
        let mut c = GrilleConfig {
            specialization: s,
            mode: m,
            ..base.clone()
        };
        f(&mut c);
        SweepPoint::new(label, GeneratorSpec::Grille(c))
    };
    let mut grid = vec![
        g("uniform + random", Specialization::Uniform, GrilleMode::Random, &|_| {}),
        g(
            "blank-gradient + random",
            Specialization::BlankGradient,
            GrilleMode::Random,
            &|_| {},
        ),
    ];
    if let Some(src) = &language_source {
        grid.push(g("learned-language + random", Specialization::Learned, GrilleMode::Random, &|c| {
            c.source = Some(src.clone())
        }));
    }
    if let Some(src) = &random_source {
        grid.push(g("learned-random + random", Specialization::Learned, GrilleMode::Random, &|c| {
            c.source = Some(src.clone())
        }));
    }
    if let Some(src) = &language_source {
        for p in [0.0, 0.05, 0.10, 0.30] {
            grid.push(g(
                &format!("row-sequential language (p={p:.2})"),
                Specialization::Learned,
                GrilleMode::Sequential,
                &|c| {
                    c.source = Some(src.clone());
                    c.jump_prob = p;
                },
            ));
        }
    }
    for (label, m) in [
        ("split + random", GrilleMode::Random),
        ("split + shift", GrilleMode::Shift),
        ("split + rotate", GrilleMode::Rotate),
    ] {
        grid.push(g(label, Specialization::Split, m, &|_| {}));
    }
    grid
}
