//! `hyperfine-levels` and `magic-field`.

use qmlab_core::hyperfine::{HyperfineModel, Label, CANONICAL_LABELS};

use super::{new_table, Outcome};
use crate::config::{ExperimentConfig, Kind, ParamSpec};
use crate::error::{CliError, CliResult};

pub const LEVELS: [ParamSpec; 1] = [ParamSpec::new("b", Kind::Range, "0:3000:1", "Bz sweep in gauss, min:max:step")];

pub fn levels(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let fields = cfg.range("b")?.points();
    let model = HyperfineModel::rb87();
    let tracked = model.track(&fields)?;
    let mut columns = vec!["bz".to_string()];
    columns.extend(CANONICAL_LABELS.iter().map(|l| format!("e_f{}_m{}", l.f, l.m)));
    let mut t = new_table(cfg, columns);
    for lv in &tracked {
        let mut row = vec![lv.bz];
        row.extend(lv.energies);
        t.push(row)?;
    }
    let min_overlap = tracked.iter().map(|l| l.min_overlap).fold(1.0, f64::min);
    t.result("min_tracking_overlap", min_overlap);
    let summary = format!(
        "hyperfine-levels: {} fields from {} to {} G, smallest tracking overlap {:.6}",
        fields.len(),
        fields[0],
        fields[fields.len() - 1],
        min_overlap
    );
    Ok(Outcome::single(t, summary))
}

pub const MAGIC: [ParamSpec; 5] = [
    ParamSpec::new("bracket", Kind::Pair, "0.5,6", "search interval for Bz in gauss"),
    ParamSpec::new("upper_f", Kind::Int, "2", "F of the upper level"),
    ParamSpec::new("upper_m", Kind::Int, "1", "M_F of the upper level"),
    ParamSpec::new("lower_f", Kind::Int, "1", "F of the lower level"),
    ParamSpec::new("lower_m", Kind::Int, "-1", "M_F of the lower level"),
];

fn label(cfg: &ExperimentConfig, f: &str, m: &str) -> CliResult<Label> {
    let l = Label::new(cfg.int(f)? as i32, cfg.int(m)? as i32);
    if !CANONICAL_LABELS.contains(&l) {
        return Err(CliError::config(format!("({}, {}) is not a ground-state hyperfine level", l.f, l.m)));
    }
    Ok(l)
}

pub fn magic(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let (lo, hi) = cfg.pair("bracket")?;
    if !(lo >= 0.0 && hi > lo) {
        return Err(CliError::config(format!("bracket must satisfy 0 <= lo < hi, got ({lo}, {hi})")));
    }
    let upper = label(cfg, "upper_f", "upper_m")?;
    let lower = label(cfg, "lower_f", "lower_m")?;
    let r = HyperfineModel::rb87().magic_field(upper, lower, (lo, hi))?;
    let mut t = new_table(cfg, ["bz", "offset", "is_minimum"]);
    t.push(vec![r.bz, r.gap, if r.is_minimum { 1.0 } else { 0.0 }])?;
    t.result("bz", r.bz);
    t.result("offset", r.gap);
    let summary = format!(
        "magic-field: Bz = {:.6} G, transition offset {:.8} MHz ({})",
        r.bz,
        r.gap,
        if r.is_minimum { "minimum" } else { "maximum" }
    );
    Ok(Outcome::single(t, summary))
}
