//! The active-training-set manager: initialization, counterexample
//! additions, threshold- and generation-triggered variants, capped eviction,
//! and the static baseline.
//!
//! Evolution evaluates the population on the active subset `T_A` of the full
//! training set `T`. Programs that pass enough of `T_A` are verified on the
//! cases they have not seen; one case they still fail is added as a
//! counterexample. In `Static` mode nothing is ever added and passers go
//! straight to full verification.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::problems::{Split, TrainingCase};

/// Which addition policy a run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantMode {
    /// Add a counterexample whenever an individual passes all of `T_A`.
    Standard,
    /// Also trigger on individuals passing at least `q * |T_A|` cases.
    Threshold,
    /// Standard, plus a forced addition every `d` generations since the
    /// last one, using a case the generation's best individual fails.
    Generation,
    /// Generation-based additions with `|T_A|` capped; adding past the cap
    /// first evicts the active case passed by the most individuals.
    Capped,
    /// `T_A` never changes; passers are only verified.
    Static,
}

impl VariantMode {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "standard" => Ok(VariantMode::Standard),
            "threshold" => Ok(VariantMode::Threshold),
            "generation" => Ok(VariantMode::Generation),
            "capped" => Ok(VariantMode::Capped),
            "static" => Ok(VariantMode::Static),
            other => Err(ConfigError::UnknownVariant(other.to_string())),
        }
    }
}

/// Variant parameters; only the fields relevant to `mode` are read.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantConfig {
    pub mode: VariantMode,
    /// Threshold proportion in [0, 1] (`Threshold` mode).
    pub q: f64,
    /// Generation gap between forced additions (`Generation`/`Capped`).
    pub d: u64,
    /// Active-set cap (`Capped` mode).
    pub cap: usize,
    /// Initial `|T_A|`.
    pub initial_size: usize,
    /// Generation-based additions pick any unseen case at random instead of
    /// evaluating the best individual. Off by default; the standard form
    /// uses the best individual's failures.
    pub random_addition: bool,
}

impl VariantConfig {
    pub fn new(mode: VariantMode) -> Self {
        VariantConfig {
            mode,
            q: 0.8,
            d: 50,
            cap: 10,
            initial_size: 10,
            random_addition: false,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.q) {
            return Err(ConfigError::invalid("q", format!("{} not in [0, 1]", self.q)));
        }
        if self.d < 1 {
            return Err(ConfigError::invalid("d", "must be >= 1"));
        }
        if self.initial_size < 1 {
            return Err(ConfigError::invalid("initial_active_size", "must be >= 1"));
        }
        if self.mode == VariantMode::Capped && self.cap < self.initial_size {
            return Err(ConfigError::invalid(
                "cap",
                format!("{} smaller than initial active size {}", self.cap, self.initial_size),
            ));
        }
        Ok(())
    }

    /// Canonical arm label used in run summaries and `stats --compare`.
    pub fn label(&self) -> String {
        match self.mode {
            VariantMode::Standard => "standard".to_string(),
            VariantMode::Threshold => format!("threshold_q{}", self.q),
            VariantMode::Generation => format!("generation_d{}", self.d),
            VariantMode::Capped => format!("capped_d{}_max{}", self.d, self.cap),
            VariantMode::Static => "static".to_string(),
        }
    }
}

/// Result of processing one triggering individual.
#[derive(Clone, Debug, PartialEq)]
pub enum TriggerOutcome {
    /// Passes every case in `T`: a training-set solution.
    Solution,
    /// One failed case was added to `T_A`.
    Added {
        case: usize,
        /// The triggering individual's error on the added case; `None` for
        /// random additions, which have no triggering individual.
        error: Option<f64>,
        /// Case evicted to respect the cap, if any.
        evicted: Option<usize>,
    },
    /// Nothing addable: every case the individual fails is already active.
    NoNewCase,
}

/// Pass counts for the evaluated active cases, used by capped eviction:
/// `(train case index, individuals passing it)`.
pub struct CapContext<'a> {
    pub cap: usize,
    pub pass_counts: &'a [(usize, usize)],
}

/// The iCDGP state: full training set, active indices, test set, and the
/// generation of the last addition.
#[derive(Clone, Debug)]
pub struct CaseSet {
    train: Vec<TrainingCase>,
    test: Vec<TrainingCase>,
    active: Vec<usize>,
    last_addition_gen: u64,
}

/// A uniform random size-`initial_size` subset of `0..train_len`.
pub fn init_active(
    train_len: usize,
    initial_size: usize,
    rng: &mut impl Rng,
) -> Result<Vec<usize>, ConfigError> {
    if initial_size > train_len {
        return Err(ConfigError::InitialActiveTooLarge {
            requested: initial_size,
            available: train_len,
        });
    }
    let mut picked = rand::seq::index::sample(rng, train_len, initial_size).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

impl CaseSet {
    /// Splits `cases` by their split tag and draws the initial active set.
    pub fn new(
        cases: Vec<TrainingCase>,
        initial_size: usize,
        rng: &mut impl Rng,
    ) -> Result<Self, ConfigError> {
        let (train, test): (Vec<_>, Vec<_>) =
            cases.into_iter().partition(|c| c.split == Split::Train);
        let active = init_active(train.len(), initial_size, rng)?;
        Ok(CaseSet {
            train,
            test,
            active,
            last_addition_gen: 0,
        })
    }

    pub fn train(&self) -> &[TrainingCase] {
        &self.train
    }

    pub fn test(&self) -> &[TrainingCase] {
        &self.test
    }

    /// Active train-case indices, in addition order. Error and behavior
    /// vectors are indexed in this order.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn active_len(&self) -> usize {
        self.active.len()
    }

    pub fn last_addition_gen(&self) -> u64 {
        self.last_addition_gen
    }

    /// Train indices outside `known`, in index order.
    pub fn unknown_indices(&self, known: &[usize]) -> Vec<usize> {
        (0..self.train.len()).filter(|i| !known.contains(i)).collect()
    }

    /// Standard iCDGP: the individual passed every case in `eval_active`
    /// (the active set it was evaluated on). Evaluates it on every case it
    /// has not seen; if all pass it is a solution, otherwise one failed
    /// case not yet active is added.
    ///
    /// When earlier passers this generation already added cases, those are
    /// excluded from addition (they are active now) but still count against
    /// solution status.
    pub fn process_passer(
        &mut self,
        eval_active: &[usize],
        eval_error: &mut impl FnMut(usize, &TrainingCase) -> f64,
        current_gen: u64,
        cap: Option<&CapContext<'_>>,
        rng: &mut impl Rng,
    ) -> TriggerOutcome {
        self.process_trigger(true, eval_active, eval_error, current_gen, cap, rng)
    }

    /// Threshold variant: the individual passed at least `q * |T_A|` of
    /// `eval_active`; `passes_all_active` says whether it passed all of
    /// them. Evaluates on all unseen cases; a solution requires passing
    /// everything, an addition requires an inactive failed case, and an
    /// individual failing only active cases yields `NoNewCase`.
    pub fn process_threshold(
        &mut self,
        passes_all_active: bool,
        eval_active: &[usize],
        eval_error: &mut impl FnMut(usize, &TrainingCase) -> f64,
        current_gen: u64,
        cap: Option<&CapContext<'_>>,
        rng: &mut impl Rng,
    ) -> TriggerOutcome {
        self.process_trigger(passes_all_active, eval_active, eval_error, current_gen, cap, rng)
    }

    fn process_trigger(
        &mut self,
        passes_all_eval_active: bool,
        eval_active: &[usize],
        eval_error: &mut impl FnMut(usize, &TrainingCase) -> f64,
        current_gen: u64,
        cap: Option<&CapContext<'_>>,
        rng: &mut impl Rng,
    ) -> TriggerOutcome {
        let unknown = self.unknown_indices(eval_active);
        let mut failed: Vec<(usize, f64)> = Vec::new();
        for idx in unknown {
            let err = eval_error(idx, &self.train[idx]);
            if err != 0.0 {
                failed.push((idx, err));
            }
        }
        if failed.is_empty() && passes_all_eval_active {
            return TriggerOutcome::Solution;
        }
        let addable: Vec<(usize, f64)> = failed
            .into_iter()
            .filter(|(idx, _)| !self.active.contains(idx))
            .collect();
        match addable.choose(rng) {
            None => TriggerOutcome::NoNewCase,
            Some(&(case, error)) => {
                let evicted = self.add_case(case, current_gen, cap, rng);
                TriggerOutcome::Added {
                    case,
                    error: Some(error),
                    evicted,
                }
            }
        }
    }

    /// Generation-based addition: called when [`Self::should_tick`] fires.
    /// Evaluates the generation's best individual on every inactive case and
    /// adds a random one it fails. The addition clock resets even when the
    /// best individual passes everything it has not seen.
    pub fn generation_tick(
        &mut self,
        best_eval_error: &mut impl FnMut(usize, &TrainingCase) -> f64,
        current_gen: u64,
        cap: Option<&CapContext<'_>>,
        rng: &mut impl Rng,
    ) -> TriggerOutcome {
        self.last_addition_gen = current_gen;
        let candidates = self.unknown_indices(&self.active);
        let mut failed: Vec<(usize, f64)> = Vec::new();
        for idx in candidates {
            let err = best_eval_error(idx, &self.train[idx]);
            if err != 0.0 {
                failed.push((idx, err));
            }
        }
        match failed.choose(rng) {
            None => TriggerOutcome::NoNewCase,
            Some(&(case, error)) => {
                let evicted = self.add_case(case, current_gen, cap, rng);
                TriggerOutcome::Added {
                    case,
                    error: Some(error),
                    evicted,
                }
            }
        }
    }

    /// Generation-based addition with `random_addition`: adds any random
    /// inactive case, without consulting the population.
    pub fn random_tick(
        &mut self,
        current_gen: u64,
        cap: Option<&CapContext<'_>>,
        rng: &mut impl Rng,
    ) -> TriggerOutcome {
        self.last_addition_gen = current_gen;
        let candidates = self.unknown_indices(&self.active);
        match candidates.choose(rng) {
            None => TriggerOutcome::NoNewCase,
            Some(&case) => {
                let evicted = self.add_case(case, current_gen, cap, rng);
                TriggerOutcome::Added {
                    case,
                    error: None,
                    evicted,
                }
            }
        }
    }

    /// Whether the `d`-generation clock has elapsed since the last addition.
    pub fn should_tick(&self, d: u64, current_gen: u64) -> bool {
        current_gen - self.last_addition_gen >= d
    }

    fn add_case(
        &mut self,
        case: usize,
        current_gen: u64,
        cap: Option<&CapContext<'_>>,
        rng: &mut impl Rng,
    ) -> Option<usize> {
        debug_assert!(!self.active.contains(&case));
        let mut evicted = None;
        if let Some(ctx) = cap {
            if self.active.len() >= ctx.cap {
                evicted = Some(self.cap_evict(ctx.pass_counts, rng));
            }
        }
        self.active.push(case);
        self.last_addition_gen = current_gen;
        evicted
    }

    /// Removes the active case passed by the most individuals (ties broken
    /// uniformly at random) and returns its train index. Only cases with
    /// population pass counts are considered: cases added earlier in the
    /// same generation have not been evaluated by the population and are
    /// not evicted.
    pub fn cap_evict(&mut self, pass_counts: &[(usize, usize)], rng: &mut impl Rng) -> usize {
        let mut evictable: Vec<(usize, usize)> = pass_counts
            .iter()
            .copied()
            .filter(|(idx, _)| self.active.contains(idx))
            .collect();
        if evictable.is_empty() {
            // Degenerate cap: every evaluated case was already evicted this
            // generation. Fall back to a uniform choice so the cap holds.
            evictable = self.active.iter().map(|&i| (i, 0)).collect();
        }
        let max_count = evictable.iter().map(|&(_, c)| c).max().unwrap();
        let top: Vec<usize> = evictable
            .iter()
            .filter(|&&(_, c)| c == max_count)
            .map(|&(idx, _)| idx)
            .collect();
        let victim = *top.choose(rng).unwrap();
        self.active.retain(|&i| i != victim);
        victim
    }
}

#[cfg(test)]
mod tests;
