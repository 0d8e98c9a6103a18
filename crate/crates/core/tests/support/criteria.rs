//! Acceptance checks shared by the crate tests and the acceptance target.
//! Each returns `Ok(detail)` on success and `Err(reason)` on failure.

use std::collections::{BTreeMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fetqc_core::eval::metrics::{agreement_metrics, classification_metrics, cohen_kappa, r2_score, regression_metrics, spearman};
use fetqc_core::eval::splits::{loso_split, pure_test_split, subject_kfold};
use fetqc_core::forest::{fit_forest, FeatureTable, ForestParams, Task};
use fetqc_core::iqm::dl::{DlInputs, DlRoi, DlSliceScore};
use fetqc_core::iqm::extract::{extract, StackInputs};
use fetqc_core::iqm::intensity::{
    estimate_bias, rank_error, shannon_entropy, slice_pair_metric, summary_stats, MaskCombine, Pairing, RankErrorParams, SliceMetricKind,
    SlicePairParams,
};
use fetqc_core::iqm::mask::{centroid_stat, closing_diff, mask_volume, DEFAULT_CLOSING_LENGTH};
use fetqc_core::iqm::seg::{cnr, cjv, merge_labels, region_summary_stats, snr_region, snr_total, wm2max, LabelMerge};
use fetqc_core::phantom::{gen_stack, PhantomSpec, PhantomStack};
use fetqc_core::rng::{standard_normal, Rng};
use fetqc_core::{build_catalogue, stats, CatalogueConfig, Mask, Split, StackRecord, Tissue, TissueMap, Volume};
use rand::Rng as _;

use super::gen;
use super::oracles::{self as o, close, close_opt};

pub const REL_TOL: f64 = 1e-9;

/// Collects mismatches, keeping the first few messages.
#[derive(Default)]
pub struct Tally {
    pub checked: usize,
    pub failed: usize,
    pub messages: Vec<String>,
}

impl Tally {
    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.messages.len() < 8 {
                self.messages.push(what());
            }
        }
    }

    pub fn finish(self, label: &str) -> Result<String, String> {
        if self.failed == 0 {
            Ok(format!("{label}: {} comparisons agree", self.checked))
        } else {
            Err(format!("{label}: {}/{} mismatches; {}", self.failed, self.checked, self.messages.join("; ")))
        }
    }
}

const PAIRINGS: [Pairing; 3] = [Pairing::AllPairs, Pairing::Window(1), Pairing::Window(3)];
const COMBINES: [MaskCombine; 3] = [MaskCombine::None, MaskCombine::Union, MaskCombine::Intersection];

/// Compares every mask-, intensity- and segmentation-based IQM with its
/// brute-force oracle on `n` random small stacks.
pub fn iqm_oracles(n: usize, seed: u64) -> Result<String, String> {
    let mut t = Tally::default();
    let mut r = gen::rng(seed);
    for case in 0..n {
        let (dims, spacing) = gen::dims_spacing(&mut r);
        let vol = gen::volume(&mut r, dims, spacing);
        let mask = gen::mask(&mut r, dims);
        let seg = gen::tissues(&mut r, dims);
        compare_stack(&mut t, case, &vol, &mask, &seg);
    }
    t.finish("IQM oracles")
}

fn compare_stack(t: &mut Tally, case: usize, vol: &Volume, mask: &Mask, seg: &TissueMap) {
    let sp = vol.spacing();
    for (center_only, relative, masked) in [(false, false, true), (true, false, true), (false, true, true), (false, false, false), (true, true, false)] {
        let p = RankErrorParams { center_only, relative, masked, threshold: 0.01 };
        let got = rank_error(vol, mask, &p).ok();
        let want = o::rank_error(vol, mask, center_only, relative, masked, 0.01);
        t.check(close_opt(got, want, REL_TOL), || format!("case {case} rank_error {p:?}: {got:?} vs {want:?}"));
    }
    for kind in SliceMetricKind::ALL {
        for pairing in PAIRINGS {
            for combine in COMBINES {
                let got = slice_pair_metric(vol, mask, &SlicePairParams { kind, pairing, combine }).ok();
                let want = o::slice_pair_metric(vol, mask, kind, pairing, combine);
                t.check(close_opt(got, want, REL_TOL), || format!("case {case} {} {pairing:?} {combine:?}: {got:?} vs {want:?}", kind.name()));
            }
        }
    }
    let values = o::masked_values(vol, mask);
    let got = summary_stats(vol, mask).ok().map(|s| [s.mean, s.median, s.std, s.p05, s.p95, s.cov, s.kurtosis, s.mad]);
    let want = o::summary(&values);
    let same = match (got, want) {
        (Some(g), Some(w)) => g.iter().zip(&w).all(|(a, b)| close(*a, *b, REL_TOL)),
        (None, None) => true,
        _ => false,
    };
    t.check(same, || format!("case {case} summary stats: {got:?} vs {want:?}"));
    for bins in [8, 128] {
        let got = shannon_entropy(vol, Some(mask), bins).ok();
        t.check(close_opt(got, o::entropy(&values, bins), REL_TOL), || format!("case {case} entropy/{bins}: {got:?}"));
        let got = shannon_entropy(vol, None, bins).ok();
        t.check(close_opt(got, o::entropy(vol.data(), bins), REL_TOL), || format!("case {case} entropy(all)/{bins}: {got:?}"));
    }
    for center_only in [false, true] {
        let got = centroid_stat(mask, sp, center_only).ok();
        let want = o::centroid_stat(mask, sp, center_only);
        t.check(close_opt(got, want, REL_TOL), || format!("case {case} centroid center={center_only}: {got:?} vs {want:?}"));
        for len in [3, DEFAULT_CLOSING_LENGTH] {
            let got = closing_diff(mask, len, center_only).ok();
            let want = o::closing_diff(mask, len, center_only);
            t.check(close_opt(got, want, REL_TOL), || format!("case {case} closing/{len} center={center_only}: {got:?} vs {want:?}"));
        }
    }
    let (got, want) = (mask_volume(mask, sp), o::mask_volume(mask, sp));
    t.check(close(got, want, REL_TOL), || format!("case {case} mask_volume: {got} vs {want}"));

    let kept = o::kept_slices(mask);
    let center = o::center_third(&kept);
    for slices in [None, Some(center.as_slice())] {
        let Ok(rs) = region_summary_stats(vol, seg, slices) else {
            t.check(false, || format!("case {case} region stats failed"));
            continue;
        };
        let samples: Vec<Vec<f64>> = Tissue::ALL.iter().map(|&ti| o::region_values(vol, seg, ti, slices)).collect();
        let mut snrs = vec![];
        for ti in Tissue::ALL {
            let s = &samples[ti.index()];
            let reg = rs.region(ti);
            let want = o::summary(s);
            let got = reg.stats.map(|x| [x.mean, x.median, x.std, x.p05, x.p95, x.cov, x.kurtosis, x.mad]);
            let same = match (got, want) {
                (Some(g), Some(w)) => g.iter().zip(&w).all(|(a, b)| close(*a, *b, REL_TOL)),
                (None, None) => true,
                _ => false,
            };
            t.check(same && reg.n == s.len(), || format!("case {case} region {} stats", ti.name()));
            let vol_mm3 = s.len() as f64 * sp[0] * sp[1] * sp[2];
            t.check(close(reg.volume_mm3, vol_mm3, REL_TOL), || format!("case {case} region {} volume", ti.name()));
            let got = snr_region(&rs, ti).ok();
            let want = o::snr(s);
            t.check(close_opt(got, want, REL_TOL), || format!("case {case} snr {}: {got:?} vs {want:?}", ti.name()));
            snrs.extend(want);
        }
        let want_total = (!snrs.is_empty()).then(|| snrs.iter().sum::<f64>() / snrs.len() as f64);
        let got = snr_total(&rs).ok();
        t.check(close_opt(got, want_total, REL_TOL), || format!("case {case} snr_total: {got:?} vs {want_total:?}"));
        let (bg, gm, wm) = (&samples[Tissue::Bg.index()], &samples[Tissue::Gm.index()], &samples[Tissue::Wm.index()]);
        let (want_cnr, want_cjv) = o::cnr_cjv(bg, gm, wm);
        let got = cnr(&rs).ok();
        t.check(close_opt(got, want_cnr, REL_TOL), || format!("case {case} cnr: {got:?} vs {want_cnr:?}"));
        let got = cjv(&rs).ok();
        t.check(close_opt(got, want_cjv, REL_TOL), || format!("case {case} cjv: {got:?} vs {want_cjv:?}"));
        let got = wm2max(vol.data(), &rs).ok().map(|w| w.value);
        let want = o::wm2max(vol.data(), wm);
        t.check(close_opt(got, want, REL_TOL), || format!("case {case} wm2max: {got:?} vs {want:?}"));
    }
}

pub fn strictly(values: &[f64], increasing: bool) -> bool {
    values.windows(2).all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

fn sweep(levels: &[f64], seed: u64, set: impl Fn(&mut PhantomSpec, f64)) -> Result<Vec<PhantomStack>, String> {
    levels
        .iter()
        .map(|&v| {
            let mut spec = PhantomSpec::clean(seed);
            set(&mut spec, v);
            gen_stack(&spec).map_err(|e| e.to_string())
        })
        .collect()
}

fn wm_snr(s: &PhantomStack) -> Option<f64> {
    let t = merge_labels(&s.labels, &LabelMerge::fetal_default()).ok()?;
    snr_region(&region_summary_stats(&s.volume, &t, None).ok()?, Tissue::Wm).ok()
}

fn ncc(s: &PhantomStack) -> Option<f64> {
    let p = SlicePairParams { kind: SliceMetricKind::Ncc, pairing: Pairing::AllPairs, combine: MaskCombine::None };
    slice_pair_metric(&s.volume, &s.mask, &p).ok()
}

/// Sweeps each artifact knob over four levels with the others at zero and
/// checks the direction of its detector IQM, for several phantom seeds.
pub fn artifact_monotonicity(seeds: &[u64]) -> Result<String, String> {
    type Detector = fn(&PhantomStack) -> Option<f64>;
    type Knob = fn(&mut PhantomSpec, f64);
    type Check = (&'static str, [f64; 4], Knob, &'static str, Detector, bool);
    let checks: [Check; 6] = [
        ("motion", [0.0, 1.0, 2.0, 4.0], |s, v| s.motion_shift_std = v, "centroid", |s| centroid_stat(&s.mask, s.volume.spacing(), false).ok(), true),
        ("motion", [0.0, 1.0, 2.0, 4.0], |s, v| s.motion_shift_std = v, "closing_diff", |s| closing_diff(&s.mask, DEFAULT_CLOSING_LENGTH, false).ok(), true),
        ("drop", [0.0, 0.15, 0.4, 0.8], |s, v| s.slice_drop_prob = v, "NCC", ncc, false),
        ("bias", [0.0, 0.3, 0.6, 1.2], |s, v| s.bias_amplitude = v, "bias", |s| estimate_bias(&s.volume, Some(&s.mask), 2).ok(), true),
        ("noise", [0.0, 0.03, 0.06, 0.12], |s, v| s.noise_std = v, "SNR_WM", wm_snr, false),
        ("fov", [0.0, 0.1, 0.2, 0.4], |s, v| s.fov_crop_fraction = v, "mask_volume", |s| Some(mask_volume(&s.mask, s.volume.spacing())), false),
    ];
    let mut lines = vec![];
    for &seed in seeds {
        for (knob, levels, set, name, detector, increasing) in &checks {
            let stacks = sweep(levels, seed, set)?;
            let v: Option<Vec<f64>> = stacks.iter().map(detector).collect();
            let v = v.ok_or_else(|| format!("{knob}: {name} undefined (seed {seed})"))?;
            if !strictly(&v, *increasing) {
                return Err(format!("{knob} -> {name} not monotone (seed {seed}): {v:?}"));
            }
            if seed == seeds[0] {
                lines.push(format!("{knob}->{name} {}", if *increasing { "up" } else { "down" }));
            }
        }
    }
    Ok(format!("{} over {} seeds", lines.join(", "), seeds.len()))
}

/// Group sizes of the default catalogue.
pub const GROUP_COUNTS: [(&str, usize); 19] = [
    ("rank_error", 5),
    ("slice_loss", 32),
    ("sstats", 14),
    ("entropy", 2),
    ("bias", 3),
    ("filter_image", 4),
    ("mask_volume", 1),
    ("centroid", 2),
    ("closing_mask", 2),
    ("filter_mask", 4),
    ("seg_sstats", 64),
    ("seg_volume", 6),
    ("seg_SNR", 10),
    ("seg_CNR", 2),
    ("seg_CJV", 2),
    ("seg_WM2max", 2),
    ("im_size", 5),
    ("dl_slice", 5),
    ("dl_stack", 1),
];

fn degenerate_inputs(case: usize, r: &mut Rng) -> (Volume, Option<Mask>, Option<TissueMap>, Option<DlInputs>) {
    let (mut dims, spacing) = gen::dims_spacing(r);
    match case % 10 {
        0 => dims[2] = 2,
        1 => dims[2] = 1,
        2 => dims = [1, 1, 1],
        3 => dims = [2, 2, r.gen_range(1..4)],
        _ => {}
    }
    let vol = match case % 7 {
        0 => Volume::from_fn(dims, spacing, |_, _, _| 0.0).unwrap(),
        1 => Volume::from_fn(dims, spacing, |_, _, _| 42.0).unwrap(),
        2 => Volume::from_fn(dims, spacing, |x, _, _| if x % 2 == 0 { f64::NAN } else { f64::INFINITY }).unwrap(),
        3 => Volume::from_fn(dims, spacing, |_, _, _| r.gen_range(-1e150..1e150)).unwrap(),
        4 => Volume::from_fn(dims, spacing, |_, _, _| -r.gen_range(0.0..10.0)).unwrap(),
        _ => gen::volume(r, dims, spacing),
    };
    let mask = match case % 6 {
        0 => Some(Mask::from_fn(dims, |_, _, _| false)),
        1 => Some(Mask::full(dims)),
        2 => Some(Mask::from_fn(dims, |x, y, z| x == 0 && y == 0 && z == 0)),
        3 => None,
        4 => Some(Mask::from_fn(dims, |_, _, z| z == dims[2] - 1)),
        _ => Some(gen::mask(r, dims)),
    };
    let seg = match case % 5 {
        0 => None,
        1 => Some(TissueMap::new(dims, vec![Tissue::Bg; dims[0] * dims[1] * dims[2]]).unwrap()),
        2 => Some(TissueMap::new(dims, vec![Tissue::Wm; dims[0] * dims[1] * dims[2]]).unwrap()),
        _ => Some(gen::tissues(r, dims)),
    };
    let dl = match case % 4 {
        0 => None,
        1 => Some(DlInputs::default()),
        2 => Some(DlInputs {
            slices: vec![DlSliceScore { slice_index: 0, p_pass: 0.0, p_fail: 0.0, roi: DlRoi::Full }],
            stack: Some(f64::NAN),
        }),
        _ => Some(DlInputs {
            slices: (0..dims[2])
                .flat_map(|z| {
                    let p = r.gen_range(0.0..1.0);
                    [DlRoi::Full, DlRoi::Crop].map(|roi| DlSliceScore { slice_index: z, p_pass: p, p_fail: 1.0 - p, roi })
                })
                .collect(),
            stack: Some(r.gen_range(0.0..1.0)),
        }),
    };
    (vol, mask, seg, dl)
}

/// Catalogue size and family counts, then extraction on `n_fuzz` degenerate
/// stacks: no panic, one value and flag per IQM, flagged entries are zero and
/// unflagged entries finite.
pub fn catalogue_contract(n_fuzz: usize, seed: u64) -> Result<String, String> {
    let cat = build_catalogue(&CatalogueConfig::default()).map_err(|e| e.to_string())?;
    let names = fetqc_core::IqmVector::feature_names(cat.names());
    if cat.len() != 166 || names.len() != 332 {
        return Err(format!("catalogue has {} IQMs and {} columns", cat.len(), names.len()));
    }
    let got: BTreeMap<&str, usize> = cat.group_counts().into_iter().collect();
    let want: BTreeMap<&str, usize> = GROUP_COUNTS.into_iter().collect();
    if got != want {
        return Err(format!("group counts differ: {got:?}"));
    }
    let unique: HashSet<&String> = cat.names().iter().collect();
    if unique.len() != cat.len() {
        return Err("duplicate IQM names".into());
    }
    let mut r = gen::rng(seed);
    let mut flagged = 0usize;
    for case in 0..n_fuzz {
        let (vol, mask, seg, dl) = degenerate_inputs(case, &mut r);
        let res = catch_unwind(AssertUnwindSafe(|| {
            let mut inputs = StackInputs::new(&vol);
            if let Some(m) = &mask {
                inputs = inputs.with_mask(m);
            }
            if let Some(s) = &seg {
                inputs = inputs.with_tissues(s);
            }
            if let Some(d) = &dl {
                inputs = inputs.with_dl(d);
            }
            extract(format!("fuzz{case}"), &cat, inputs)
        }));
        let ex = res.map_err(|_| format!("extraction panicked on fuzz case {case} (dims {:?})", vol.dims()))?;
        let v = &ex.vector;
        if v.len() != 166 || v.features().len() != 332 {
            return Err(format!("fuzz case {case}: {} entries", v.len()));
        }
        for (i, (&x, &f)) in v.values().iter().zip(v.flags()).enumerate() {
            if (f && x != 0.0) || !x.is_finite() {
                return Err(format!("fuzz case {case}: `{}` = {x} with flag {f}", v.names()[i]));
            }
        }
        flagged += v.flags().iter().filter(|&&f| f).count();
    }
    Ok(format!("166 IQMs / 332 columns, {} groups match; {n_fuzz} degenerate stacks, {flagged} flagged entries, no panic", want.len()))
}

fn table(n: usize, p: usize, r: &mut Rng) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..p).map(|_| f64::from(r.gen_range(-500i32..=500)) / 100.0).collect()).collect()
}

fn named(rows: Vec<Vec<f64>>) -> FeatureTable {
    let p = rows[0].len();
    FeatureTable::new((0..p).map(|j| format!("f{j}")).collect(), rows).expect("rectangular")
}

/// Strictly increasing maps that stay injective on the two-decimal grid.
const TRANSFORMS: [fn(f64) -> f64; 4] = [|x| 3.0 * x + 7.0, |x| x * x * x + x, |x| (x / 3.0).exp(), |x| x.atan()];

/// Determinism, invariance to monotone feature transforms, importance of a
/// single informative feature and the out-of-bag fraction.
pub fn forest_properties(seed: u64) -> Result<String, String> {
    let mut r = gen::rng(seed);
    let e = |e: fetqc_core::forest::ForestError| e.to_string();

    let x = named(table(120, 6, &mut r));
    let y: Vec<f64> = x.rows().iter().map(|row| f64::from(u8::from(row[0] + 0.5 * row[1] > 0.0))).collect();
    let params = ForestParams { n_trees: 50, seed: 17, max_features: None };
    let a = fit_forest(&x, &y, Task::Classification, &params).map_err(e)?;
    let b = fit_forest(&x, &y, Task::Classification, &params).map_err(e)?;
    if a != b || a.predict(&x).map_err(e)? != b.predict(&x).map_err(e)? {
        return Err("same seed gave different forests".into());
    }

    let mut checked = 0;
    for d in 0..20 {
        let p = 3 + d % 4;
        let rows = table(80, p, &mut r);
        let test = table(40, p, &mut r);
        let task = if d % 2 == 0 { Task::Classification } else { Task::Regression };
        let y: Vec<f64> = rows
            .iter()
            .map(|row| {
                let s = row[0] - row[p - 1] + 0.3 * row[1] * row[1] + r.gen_range(-1.0..1.0);
                if task == Task::Classification {
                    f64::from(u8::from(s > 0.0))
                } else {
                    s
                }
            })
            .collect();
        let maps: Vec<fn(f64) -> f64> = (0..p).map(|_| TRANSFORMS[r.gen_range(0..TRANSFORMS.len())]).collect();
        let tf = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> { rows.iter().map(|row| row.iter().zip(&maps).map(|(v, f)| f(*v)).collect()).collect() };
        let params = ForestParams { n_trees: 30, seed: 1000 + d as u64, max_features: None };
        let m1 = fit_forest(&named(rows.clone()), &y, task, &params).map_err(e)?;
        let m2 = fit_forest(&named(tf(&rows)), &y, task, &params).map_err(e)?;
        let p1 = m1.predict(&named(test.clone())).map_err(e)?;
        let p2 = m2.predict(&named(tf(&test))).map_err(e)?;
        if p1 != p2 {
            return Err(format!("monotone transform changed predictions on dataset {d}"));
        }
        checked += 1;
    }

    // Four features, the informative one last.
    let mut importance = vec![];
    for task in [Task::Classification, Task::Regression] {
        let x = named(table(300, 4, &mut r));
        let y: Vec<f64> = x
            .rows()
            .iter()
            .map(|row| match task {
                Task::Classification => f64::from(u8::from(row[3] > 0.5)),
                Task::Regression => 2.0 * row[3],
            })
            .collect();
        let m = fit_forest(&x, &y, task, &ForestParams { n_trees: 100, seed: 5, max_features: None }).map_err(e)?;
        if m.importances[3] <= 0.9 {
            return Err(format!("{} importance of the only informative feature is {:.3}", task.name(), m.importances[3]));
        }
        importance.push(m.importances[3]);
    }

    let x = named(table(1000, 2, &mut r));
    let y: Vec<f64> = x.rows().iter().map(|row| row[0]).collect();
    let m = fit_forest(&x, &y, Task::Regression, &ForestParams { n_trees: 100, seed: 9, max_features: None }).map_err(e)?;
    let fractions: Vec<f64> = (0..m.n_trees()).map(|t| m.out_of_bag(t).iter().filter(|&&b| b).count() as f64 / 1000.0).collect();
    let mean_oob = stats::mean(&fractions);
    let target = (-1.0f64).exp();
    if (mean_oob - target).abs() > 0.05 || fractions.iter().any(|f| (f - target).abs() > 0.05) {
        return Err(format!("out-of-bag fraction {mean_oob:.4} (per tree {:?})", fractions.iter().fold((1.0f64, 0.0f64), |(a, b), &f| (a.min(f), b.max(f)))));
    }
    Ok(format!(
        "deterministic; {checked} transformed datasets identical; single-signal importance {:.3}/{:.3}; OOB {mean_oob:.4}",
        importance[0], importance[1]
    ))
}

/// Random manifest: sites, scanners, subjects and stacks, with some scanners
/// held out as pure test.
pub fn random_records(r: &mut Rng) -> Vec<StackRecord> {
    let n_scanners = r.gen_range(2..8);
    let pure = r.gen_range(0..n_scanners.min(3));
    let mut out = vec![];
    for s in 0..n_scanners {
        let split = if s < pure { Split::PureTest } else { Split::Train };
        for subj in 0..r.gen_range(1..6) {
            for k in 0..r.gen_range(1..5) {
                let mut rec = StackRecord::new(&format!("sc{s}-sub{subj}-{k}"), &format!("sc{s}-sub{subj}"), &format!("scanner{s}"), &format!("site{}", s / 2));
                rec.split = split;
                out.push(rec);
            }
        }
    }
    use rand::seq::SliceRandom;
    out.shuffle(r);
    out
}

fn disjoint_and_covering(records: &[StackRecord], folds: &[(Vec<usize>, Vec<usize>)], key: fn(&StackRecord) -> &str) -> Result<(), String> {
    for (train, eval) in folds {
        let train_keys: HashSet<&str> = train.iter().map(|&i| key(&records[i])).collect();
        if let Some(&i) = eval.iter().find(|&&i| train_keys.contains(key(&records[i]))) {
            return Err(format!("group `{}` on both sides", key(&records[i])));
        }
        if train.iter().chain(eval).any(|&i| records[i].split == Split::PureTest) && eval.iter().all(|&i| records[i].split == Split::Train) {
            return Err("pure-test stack used in a cross-validation fold".into());
        }
    }
    Ok(())
}

/// Subject k-fold, LoSo and pure-test plans on `cases` random manifests never
/// put a subject (CV) or scanner (LoSo, pure test) on both sides.
pub fn split_leakage(cases: usize, seed: u64) -> Result<String, String> {
    let mut r = gen::rng(seed);
    let mut plans = 0;
    for case in 0..cases {
        let recs = random_records(&mut r);
        let train_idx: Vec<usize> = (0..recs.len()).filter(|&i| recs[i].split == Split::Train).collect();
        let fail = |m: String| format!("manifest {case}: {m}");
        let k = r.gen_range(2..6);
        if let Ok(p) = subject_kfold(&recs, k, r.gen()) {
            let folds: Vec<_> = p.folds.iter().map(|f| (f.train.clone(), f.eval.clone())).collect();
            disjoint_and_covering(&recs, &folds, |x| &x.subject_id).map_err(fail)?;
            let mut all: Vec<usize> = p.folds.iter().flat_map(|f| f.eval.clone()).collect();
            all.sort_unstable();
            if all != train_idx {
                return Err(format!("manifest {case}: CV evaluation folds do not partition the train split"));
            }
            plans += 1;
        }
        if let Ok(p) = loso_split(&recs) {
            let folds: Vec<_> = p.folds.iter().map(|f| (f.train.clone(), f.eval.clone())).collect();
            disjoint_and_covering(&recs, &folds, |x| &x.scanner_id).map_err(fail)?;
            plans += 1;
        }
        if let Ok(p) = pure_test_split(&recs) {
            for f in &p.folds {
                let train: HashSet<&str> = f.train.iter().map(|&i| recs[i].scanner_id.as_str()).collect();
                if f.eval.iter().any(|&i| train.contains(recs[i].scanner_id.as_str()) || recs[i].split != Split::PureTest) {
                    return Err(format!("manifest {case}: pure-test fold leaks"));
                }
            }
            plans += 1;
        }
    }
    Ok(format!("{cases} manifests, {plans} plans leak-free"))
}

/// Classification, regression and agreement metrics against their oracles.
pub fn metric_oracles(n: usize, seed: u64) -> Result<String, String> {
    let mut t = Tally::default();
    let mut r = gen::rng(seed);
    for case in 0..n {
        let len = r.gen_range(2..60);
        let p1 = r.gen_range(0.0..1.0);
        let y: Vec<u8> = (0..len).map(|_| u8::from(r.gen_bool(p1))).collect();
        let coarse = r.gen_bool(0.5);
        let score: Vec<f64> = (0..len).map(|_| if coarse { f64::from(r.gen_range(0u8..5)) / 4.0 } else { r.gen_range(0.0..1.0) }).collect();
        let m = classification_metrics(&y, &score, 0.5).map_err(|e| e.to_string())?;
        let (f1, precision, recall) = o::f1_precision_recall(&y, &score, 0.5);
        t.check(close(m.weighted_f1, f1, REL_TOL), || format!("case {case} F1 {} vs {f1}", m.weighted_f1));
        t.check(close(m.precision, precision, REL_TOL), || format!("case {case} precision"));
        t.check(close(m.recall, recall, REL_TOL), || format!("case {case} recall"));
        let want_auc = o::auc(&y, &score);
        t.check(close_opt(m.auc, want_auc, REL_TOL), || format!("case {case} AUC {:?} vs {want_auc:?}", m.auc));

        let truth: Vec<f64> = (0..len).map(|_| if coarse { f64::from(r.gen_range(0u8..5)) } else { r.gen_range(0.0..4.0) }).collect();
        let pred: Vec<f64> = truth.iter().map(|v| v + r.gen_range(-1.0..1.0)).collect();
        let rm = regression_metrics(&truth, &pred).map_err(|e| e.to_string())?;
        t.check(close_opt(rm.r2, o::r2(&truth, &pred), REL_TOL), || format!("case {case} R2"));
        t.check(close_opt(rm.spearman, o::spearman(&truth, &pred), REL_TOL), || format!("case {case} spearman"));
        t.check(close_opt(spearman(&truth, &pred), o::spearman(&truth, &pred), REL_TOL), || format!("case {case} spearman fn"));
        t.check(close(rm.mae, o::mae(&truth, &pred), REL_TOL), || format!("case {case} MAE"));
        t.check(close_opt(r2_score(&truth, &truth), o::r2(&truth, &truth), REL_TOL), || format!("case {case} perfect R2"));

        let a: Vec<u8> = (0..len).map(|_| u8::from(r.gen_bool(p1))).collect();
        let b: Vec<u8> = a.iter().map(|&v| if r.gen_bool(0.2) { 1 - v } else { v }).collect();
        t.check(close_opt(cohen_kappa(&a, &b), o::kappa(&a, &b), REL_TOL), || format!("case {case} kappa"));
        let ag = agreement_metrics(&truth, &pred, 1.0).map_err(|e| e.to_string())?;
        let bin = |v: &[f64]| -> Vec<u8> { v.iter().map(|&x| u8::from(x >= 1.0)).collect() };
        t.check(close_opt(ag.pearson, o::pearson(&truth, &pred), REL_TOL), || format!("case {case} pearson"));
        t.check(close_opt(ag.kappa, o::kappa(&bin(&truth), &bin(&pred)), REL_TOL), || format!("case {case} agreement kappa"));
    }
    let hand = r2_score(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]);
    t.check(hand == Some(-3.0), || format!("hand R2 {hand:?} vs -3"));
    t.finish("metric oracles")
}

/// Two simulated raters add independent Gaussian noise of known σ to a
/// uniform [0, 4] truth; their Pearson R must match `var / (var + σ²)`.
pub fn rater_agreement(seed: u64) -> Result<String, String> {
    let mut r = gen::rng(seed);
    let n = 2000;
    let var = 16.0 / 12.0;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (x, y, count) in [(1u8, 1u8, 40), (0, 0, 40), (1, 0, 10), (0, 1, 10)] {
        a.extend(core::iter::repeat_n(x, count));
        b.extend(core::iter::repeat_n(y, count));
    }
    let kappa = cohen_kappa(&a, &b).ok_or("undefined kappa")?;
    if (kappa - 0.6).abs() > 1e-12 {
        return Err(format!("contingency kappa {kappa} vs 0.6"));
    }
    let mut parts = vec![format!("contingency kappa {kappa:.3}")];
    for sigma in [0.25, 0.5, 1.0] {
        let truth: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..4.0)).collect();
        let mut rater = |t: &[f64]| -> Vec<f64> { t.iter().map(|v| v + sigma * standard_normal(&mut r)).collect() };
        let a = rater(&truth);
        let b = rater(&truth);
        let got = agreement_metrics(&a, &b, 1.0).map_err(|e| e.to_string())?.pearson.ok_or("undefined R")?;
        let predicted = var / (var + sigma * sigma);
        if (got - predicted).abs() > 0.05 {
            return Err(format!("sigma {sigma}: R {got:.3} vs predicted {predicted:.3}"));
        }
        parts.push(format!("sigma {sigma}: R {got:.3} (predicted {predicted:.3})"));
    }
    Ok(parts.join(", "))
}
