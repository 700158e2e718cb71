use std::path::Path;

use anyhow::bail;
use chemanchor::fingerprint::l1_score;
use rayon::prelude::*;
use serde_json::json;

use super::read_text;
use crate::manifest::{ItemStatus, Run, Tsv};
use crate::{Common, Outcome};

fn first_token(line: &str) -> &str {
    line.split_whitespace().next().unwrap_or_default()
}

pub fn mean_score(scores: &[u8]) -> Option<f64> {
    (!scores.is_empty()).then(|| scores.iter().map(|&s| f64::from(s)).sum::<f64>() / scores.len() as f64)
}

/// Lines are compared by position, blank lines included: a blank
/// prediction scores 0, a blank or invalid ground truth fails the line.
pub fn run(common: &Common, pred: &Path, gt: &Path) -> anyhow::Result<Outcome> {
    let pred_text = read_text(pred)?;
    let gt_text = read_text(gt)?;
    let preds: Vec<&str> = pred_text.lines().collect();
    let gts: Vec<&str> = gt_text.lines().collect();
    if preds.len() != gts.len() {
        bail!(
            "{} has {} lines but {} has {}",
            pred.display(),
            preds.len(),
            gt.display(),
            gts.len()
        );
    }
    let mut run = Run::start("eval", common, &[pred, gt], json!({}))?;
    let results: Vec<_> = preds
        .par_iter()
        .zip(gts.par_iter())
        .map(|(p, g)| l1_score(first_token(p), first_token(g)))
        .collect();
    let mut tsv = Tsv::create(run.output("eval.tsv"), &["line", "pred", "gt", "score", "tanimoto", "reason"])?;
    let mut scores = Vec::with_capacity(results.len());
    for (i, result) in results.into_iter().enumerate() {
        let (p, g) = (first_token(preds[i]), first_token(gts[i]));
        let label = format!("{}", i + 1);
        match result {
            Ok(s) => {
                let t = s.tanimoto.map(|t| format!("{t:.4}")).unwrap_or_default();
                tsv.row(&[&label, p, g, &s.score.to_string(), &t, &format!("{:?}", s.reason)])?;
                scores.push(s.score);
                run.item(ItemStatus::new(i, label, None));
            }
            Err(e) => {
                let e = e.to_string();
                tsv.row(&[&label, p, g, "0", "", &e])?;
                scores.push(0);
                run.item(ItemStatus::new(i, label, Some(e)));
            }
        }
    }
    tsv.finish()?;
    let mean = mean_score(&scores);
    run.set_config("mean", json!(mean));
    match mean {
        Some(m) => println!("mean L1 score: {m:.1} ({} lines)", scores.len()),
        None => println!("mean L1 score: n/a (0 lines)"),
    }
    run.finish()
}
