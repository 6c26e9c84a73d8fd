//! Ranks the feature channels of a target against its surroundings.

use dfst::featselect::{label_samples, rank_features, Decay};
use dfst::harness::{synth_sequence, SynthSpec};
use dfst::imaging::{build_feature_map, extract_patch};
use dfst::{BoundingBox, CnTable};

fn main() -> dfst::Result<()> {
    let seq = synth_sequence(&SynthSpec::default())?;
    let frame = seq.frame(0)?;
    let target = seq.initial_box();
    let window = target.with_size(target.w * 2.0, target.h * 2.0);
    let patch = extract_patch(&frame, &window)?;
    let map = build_feature_map(&patch, &CnTable::prototype());

    // target box in window coordinates
    let inner = BoundingBox::new(window.w / 2.0, window.h / 2.0, target.w, target.h);
    let samples = label_samples(&map, &inner)?;
    let ranking = rank_features(&samples, Decay::Auto, 8)?;

    println!("{} positive, {} negative samples", samples.n_positive(), samples.n_negative());
    println!("chan   fisher    p-value   pearson    energy");
    let name = |i: usize| if i == 0 { "lum".to_string() } else { format!("cn{}", i - 1) };
    for &i in &ranking.order {
        println!(
            "{:<6} {:9.4} {:10.3e} {:+9.4} {:9.4}",
            name(i),
            ranking.metrics.fisher[i], ranking.metrics.ttest_p[i], ranking.metrics.pearson[i], ranking.energies[i]
        );
    }
    // the tracker keeps luminance and projects the best color channels
    let kept: Vec<String> = ranking.order.iter().filter(|&&i| i != 0).take(8).map(|&i| name(i)).collect();
    println!("color channels kept: {}", kept.join(" "));
    Ok(())
}
