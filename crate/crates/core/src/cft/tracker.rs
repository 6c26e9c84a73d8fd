use std::sync::Arc;

use nalgebra::DMatrix;

use super::config::TrackerConfig;
use super::filter::{detect, gaussian_label, micro_shift, train, ResponseMap};
use super::fourier::{Fft2, Spectrum};
use super::projection::{covariance_of_channels, project_features, update_projection, ProjectionState};
use crate::error::{Error, Result};
use crate::featselect::{label_samples, rank_features, Ranking};
use crate::imaging::{build_feature_map, extract_patch, resize_bilinear, BoundingBox, CnTable, FeatureMap, Image, CN_CHANNELS};
use crate::scale::{generate_candidates, init_dictionary, patch_vector, select_box, Dictionary};

/// Search-window enlargement from the frame-to-target area ratio:
/// `clamp(0.5 * sqrt(frame_area / box_area), 1.5, 3.0)`.
pub fn estimate_padding(frame_w: usize, frame_h: usize, bbox: &BoundingBox) -> Result<f64> {
    let area = bbox.area();
    if !(area > 0.0) {
        return Err(Error::DegenerateBox(format!("box area {area}")));
    }
    let ratio = (frame_w * frame_h) as f64 / area;
    Ok((0.5 * ratio.sqrt()).clamp(1.5, 3.0))
}

/// Linear blend `(1 − lr)·model + lr·new` applied to appearance and filter.
pub fn update_model(
    appearance: &mut FeatureMap,
    alpha_hat: &mut Spectrum,
    new_appearance: &FeatureMap,
    new_alpha_hat: &Spectrum,
    lr: f64,
) -> Result<()> {
    if !appearance.same_shape(new_appearance) || !alpha_hat.same_shape(new_alpha_hat) {
        return Err(Error::Shape("model update with mismatched extents".into()));
    }
    for (m, n) in appearance.as_mut_slice().iter_mut().zip(new_appearance.as_slice()) {
        *m = (1.0 - lr) * *m + lr * n;
    }
    for (m, n) in alpha_hat.data.iter_mut().zip(&new_alpha_hat.data) {
        *m = *m * (1.0 - lr) + n * lr;
    }
    Ok(())
}

/// Diagnostics from the most recent frame.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub response: Option<ResponseMap>,
    pub ranking: Ranking,
    pub displacement_cells: (f64, f64),
}

/// Per-sequence tracker state. Owned by one run; not shared.
#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    cn: Arc<CnTable>,
    position: BoundingBox,
    padding: f64,
    /// template extent in cells (rows, cols)
    template: (usize, usize),
    /// target extent inside the template, in cells (h, w)
    target_cells: (f64, f64),
    fft: Fft2,
    label_hat: Spectrum,
    /// learned full (luminance + all color names) appearance
    model_appearance: FeatureMap,
    model_alpha_hat: Spectrum,
    projection: ProjectionState,
    /// projection history over all color-name channels, indexed by channel − 1
    cn_history: DMatrix<f64>,
    /// selected color-name channels (feature-map channel indices, 1..=10)
    selected: Vec<usize>,
    dictionary: Option<Dictionary>,
    frame_index: usize,
    last: Option<StepReport>,
}

impl Tracker {
    /// Builds the initial model from the first frame and its target box.
    pub fn init(frame: &Image, bbox: BoundingBox, config: TrackerConfig, cn: Arc<CnTable>) -> Result<Self> {
        config.validate()?;
        if !bbox.is_valid() {
            return Err(Error::DegenerateBox(format!("{bbox:?}")));
        }
        let bbox = bbox
            .clip_to(frame.width(), frame.height())
            .ok_or_else(|| Error::DegenerateBox("box lies outside the frame".into()))?;
        bbox.pixel_rect()?;

        let padding = match config.padding {
            Some(p) => p,
            None => estimate_padding(frame.width(), frame.height(), &bbox)?,
        };
        let win_w = bbox.w * (1.0 + padding);
        let win_h = bbox.h * (1.0 + padding);
        let shrink = (config.max_template_side as f64 / win_w.max(win_h)).min(1.0);
        let tw = ((win_w * shrink).round() as usize).max(2);
        let th = ((win_h * shrink).round() as usize).max(2);
        let target_cells = (bbox.h * th as f64 / win_h, bbox.w * tw as f64 / win_w);

        let fft = Fft2::new(th, tw);
        let label = gaussian_label(th, tw, target_cells.0, target_cells.1, config.label_sigma_factor);
        let label_hat = fft.forward_real(&label);

        let dictionary = if config.scale_adapt {
            let seed = patch_vector(frame, &bbox, config.patch_side)?;
            let seeds = if seed.norm() > 0.0 {
                vec![seed.clone()]
            } else {
                Vec::new()
            };
            let mut dict = if seeds.is_empty() {
                // featureless target: fall back to random atoms only
                let unit = nalgebra::DVector::from_element(seed.len(), 1.0 / (seed.len() as f64).sqrt());
                init_dictionary(&[unit], config.dict_atoms, config.rng_seed, config.sparsity, config.dict_max_iters)?
            } else {
                init_dictionary(&seeds, config.dict_atoms, config.rng_seed, config.sparsity, config.dict_max_iters)?
            };
            if seed.norm() > 0.0 {
                dict.update(&seed)?;
            }
            Some(dict)
        } else {
            None
        };

        let d2 = config.compressed_dim;
        let k = config.num_selected;
        let mut tracker = Self {
            config,
            cn,
            position: bbox,
            padding,
            template: (th, tw),
            target_cells,
            fft,
            label_hat,
            model_appearance: FeatureMap::zeros(th, tw, 1 + CN_CHANNELS),
            model_alpha_hat: Spectrum::zeros(th, tw),
            projection: ProjectionState::new(k, d2),
            cn_history: DMatrix::zeros(CN_CHANNELS, CN_CHANNELS),
            selected: (1..=k).collect(),
            dictionary,
            frame_index: 0,
            last: None,
        };

        let features = tracker.features_at(frame, &bbox)?;
        let ranking = tracker.rank(&features)?;
        tracker.selected = top_color_channels(&ranking.order, k);
        tracker.refresh_projection(&features)?;
        let projected = project_features(&features, &tracker.selected, &tracker.projection.basis)?;
        tracker.model_alpha_hat = train(
            &tracker.fft,
            &projected,
            &tracker.label_hat,
            tracker.config.kernel_sigma,
            tracker.config.lambda_reg,
        )?;
        tracker.model_appearance = features;
        tracker.last = Some(StepReport {
            response: None,
            ranking,
            displacement_cells: (0.0, 0.0),
        });
        Ok(tracker)
    }

    /// Localizes the target in `frame`, adapts the box, and updates the model.
    pub fn step(&mut self, frame: &Image) -> Result<BoundingBox> {
        let (resp, shift) = self.localize(frame, &self.position)?;
        let (cell_h, cell_w) = self.cell_size(&self.position);
        let mut bbox = BoundingBox::new(
            self.position.cx + shift.1 * cell_w,
            self.position.cy + shift.0 * cell_h,
            self.position.w,
            self.position.h,
        );
        bbox.cx = bbox.cx.clamp(0.0, frame.width() as f64);
        bbox.cy = bbox.cy.clamp(0.0, frame.height() as f64);

        let mut dict_sample = None;
        if let Some(dict) = &self.dictionary {
            let cands = generate_candidates(&bbox, &self.config.scales, &self.config.shifts)?;
            let pick = select_box(frame, &cands, dict, self.config.patch_side)?;
            dict_sample = Some(pick.bbox);
            let keep = self.config.scale_damping;
            bbox = BoundingBox::new(
                pick.bbox.cx.clamp(0.0, frame.width() as f64),
                pick.bbox.cy.clamp(0.0, frame.height() as f64),
                keep * bbox.w + (1.0 - keep) * pick.bbox.w,
                keep * bbox.h + (1.0 - keep) * pick.bbox.h,
            );
        }

        let features = self.features_at(frame, &bbox)?;
        let ranking = self.rank(&features)?;
        if self.config.dynamic_selection {
            self.selected = top_color_channels(&ranking.order, self.config.num_selected);
        }
        self.refresh_projection(&features)?;
        let projected = project_features(&features, &self.selected, &self.projection.basis)?;
        let alpha_new = train(
            &self.fft,
            &projected,
            &self.label_hat,
            self.config.kernel_sigma,
            self.config.lambda_reg,
        )?;
        update_model(
            &mut self.model_appearance,
            &mut self.model_alpha_hat,
            &features,
            &alpha_new,
            self.config.lr_appearance,
        )?;

        if let Some(dict) = &mut self.dictionary {
            // train on the crop that won selection, not the damped compromise,
            // so the dictionary does not absorb the lag it is meant to correct
            let x = patch_vector(frame, &dict_sample.unwrap_or(bbox), self.config.patch_side)?;
            if x.norm() > 0.0 {
                dict.update(&x)?;
            }
        }

        self.position = bbox;
        self.frame_index += 1;
        self.last = Some(StepReport {
            response: Some(resp),
            ranking,
            displacement_cells: shift,
        });
        Ok(bbox)
    }

    /// Functional form of [`Tracker::step`].
    pub fn track_step(mut self, frame: &Image) -> Result<(Self, BoundingBox)> {
        let b = self.step(frame)?;
        Ok((self, b))
    }

    /// Response of the current model around `at`, with the refined peak
    /// displacement in cells `(dy, dx)`.
    pub fn localize(&self, frame: &Image, at: &BoundingBox) -> Result<(ResponseMap, (f64, f64))> {
        let z = self.features_at(frame, at)?;
        let z = project_features(&z, &self.selected, &self.projection.basis)?;
        let x = project_features(&self.model_appearance, &self.selected, &self.projection.basis)?;
        let mut resp = detect(&self.fft, &self.model_alpha_hat, &x, &z, self.config.kernel_sigma)?;
        if self.config.microshift {
            resp.subcell_offset = micro_shift(&resp);
        }
        let shift = resp.refined_displacement();
        Ok((resp, shift))
    }

    /// Full 11-channel template features of the padded window around `bbox`.
    pub fn features_at(&self, frame: &Image, bbox: &BoundingBox) -> Result<FeatureMap> {
        let window = self.window(bbox);
        let patch = extract_patch(frame, &window)?;
        let (th, tw) = self.template;
        let patch = resize_bilinear(&patch, tw, th)?;
        Ok(build_feature_map(&patch, &self.cn))
    }

    fn window(&self, bbox: &BoundingBox) -> BoundingBox {
        bbox.with_size(bbox.w * (1.0 + self.padding), bbox.h * (1.0 + self.padding))
    }

    /// Pixels per template cell `(h, w)` for a window around `bbox`.
    fn cell_size(&self, bbox: &BoundingBox) -> (f64, f64) {
        let window = self.window(bbox);
        (
            window.h.round().max(1.0) / self.template.0 as f64,
            window.w.round().max(1.0) / self.template.1 as f64,
        )
    }

    fn target_in_cells(&self) -> BoundingBox {
        let (th, tw) = self.template;
        BoundingBox::new(tw as f64 / 2.0, th as f64 / 2.0, self.target_cells.1, self.target_cells.0)
    }

    fn rank(&self, features: &FeatureMap) -> Result<Ranking> {
        let samples = label_samples(features, &self.target_in_cells())?;
        rank_features(&samples, self.config.decay(), self.config.num_selected)
    }

    /// Covariance of the selected channels plus the matching block of the
    /// color-name history; stores the new basis and folds it back into the
    /// full history.
    fn refresh_projection(&mut self, features: &FeatureMap) -> Result<()> {
        let idx: Vec<usize> = self.selected.iter().map(|c| c - 1).collect();
        let restricted = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.cn_history[(idx[i], idx[j])]);
        let current = ProjectionState {
            basis: self.projection.basis.clone(),
            weights: self.projection.weights.clone(),
            history: restricted,
        };
        let cov = covariance_of_channels(features, &self.selected)?;
        let updated = update_projection(&current, &cov, self.config.lr_dim, self.config.compressed_dim)?;

        let lr = self.config.lr_dim;
        self.cn_history *= 1.0 - lr;
        let contribution = &updated.basis
            * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(updated.weights.clone()))
            * updated.basis.transpose();
        for (i, &a) in idx.iter().enumerate() {
            for (j, &b) in idx.iter().enumerate() {
                self.cn_history[(a, b)] += lr * contribution[(i, j)];
            }
        }
        self.projection = updated;
        Ok(())
    }

    pub fn position(&self) -> BoundingBox {
        self.position
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn padding(&self) -> f64 {
        self.padding
    }

    /// Template extent in cells, `(rows, cols)`.
    pub fn template_size(&self) -> (usize, usize) {
        self.template
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn projection(&self) -> &ProjectionState {
        &self.projection
    }

    pub fn model_appearance(&self) -> &FeatureMap {
        &self.model_appearance
    }

    pub fn model_alpha_hat(&self) -> &Spectrum {
        &self.model_alpha_hat
    }

    pub fn dictionary(&self) -> Option<&Dictionary> {
        self.dictionary.as_ref()
    }

    pub fn last_report(&self) -> Option<&StepReport> {
        self.last.as_ref()
    }

    /// Frames processed since init.
    pub fn frames_tracked(&self) -> usize {
        self.frame_index
    }
}

/// First `k` color-name channels in ranking order; luminance is always
/// kept separately and never counts toward `k`.
fn top_color_channels(order: &[usize], k: usize) -> Vec<usize> {
    order.iter().copied().filter(|&c| c != 0).take(k).collect()
}
