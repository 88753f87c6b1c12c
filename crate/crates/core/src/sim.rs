//! Two-group polarized crowd simulator.
//!
//! The population is split into groups A and B. Notes are planted with one
//! of three archetypes: approved by both groups (bridging), or mostly by one
//! group (partisan). Votes are drawn from a per archetype × group approval
//! probability table. An attack can then be layered on top by adding sybil
//! raters that all push one target note.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{DatasetBuilder, DuplicatePolicy, RatingsDataset};
use crate::error::{Error, Result};
use crate::rng::{stream, stream_rng};
use crate::scoring::NoteScore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Archetype {
    Bridging,
    PartisanA,
    PartisanB,
}

impl Archetype {
    pub const ALL: [Archetype; 3] = [Archetype::Bridging, Archetype::PartisanA, Archetype::PartisanB];

    pub fn as_str(self) -> &'static str {
        match self {
            Archetype::Bridging => "BRIDGING",
            Archetype::PartisanA => "PARTISAN_A",
            Archetype::PartisanB => "PARTISAN_B",
        }
    }

    pub fn is_partisan(self) -> bool {
        self != Archetype::Bridging
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Archetype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Archetype {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Archetype::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown archetype {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    A,
    B,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::A => "A",
            Group::B => "B",
        }
    }

    pub fn other(self) -> Group {
        match self {
            Group::A => Group::B,
            Group::B => Group::A,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "A" => Ok(Group::A),
            "B" => Ok(Group::B),
            other => Err(format!("unknown group {other:?}")),
        }
    }
}

/// P(approve) for each archetype × group cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApprovalTable([[f64; 2]; 3]);

impl ApprovalTable {
    pub fn uniform(p: f64) -> Self {
        ApprovalTable([[p; 2]; 3])
    }

    pub fn get(&self, archetype: Archetype, group: Group) -> f64 {
        self.0[archetype.index()][group.index()]
    }

    pub fn set(&mut self, archetype: Archetype, group: Group, p: f64) {
        self.0[archetype.index()][group.index()] = p;
    }

    /// The table seen from the other group's side: A and B columns swap and
    /// the two partisan rows swap.
    pub fn relabeled(&self) -> Self {
        let mut out = *self;
        for arch in Archetype::ALL {
            for group in [Group::A, Group::B] {
                out.set(relabel_archetype(arch), group.other(), self.get(arch, group));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        for arch in Archetype::ALL {
            for group in [Group::A, Group::B] {
                let p = self.get(arch, group);
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Contract(format!(
                        "approval probability for {arch}/{group} must lie in [0, 1], got {p}"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl Default for ApprovalTable {
    fn default() -> Self {
        ApprovalTable([[0.85, 0.85], [0.9, 0.1], [0.1, 0.9]])
    }
}

/// Swaps the partisan archetypes, leaving bridging notes alone.
pub fn relabel_archetype(a: Archetype) -> Archetype {
    match a {
        Archetype::Bridging => Archetype::Bridging,
        Archetype::PartisanA => Archetype::PartisanB,
        Archetype::PartisanB => Archetype::PartisanA,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub users_per_group: usize,
    /// Indexed by archetype: bridging, partisan A, partisan B.
    pub notes_per_archetype: [usize; 3],
    pub votes_per_note: usize,
    pub approval: ApprovalTable,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            users_per_group: 100,
            notes_per_archetype: [20; 3],
            votes_per_note: 30,
            approval: ApprovalTable::default(),
            seed: 0,
        }
    }
}

impl SimulationConfig {
    pub fn notes_of(&self, archetype: Archetype) -> usize {
        self.notes_per_archetype[archetype.index()]
    }

    pub fn num_users(&self) -> usize {
        2 * self.users_per_group
    }

    pub fn num_notes(&self) -> usize {
        self.notes_per_archetype.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.users_per_group == 0 || self.votes_per_note == 0 {
            return Err(Error::Contract(
                "users_per_group and votes_per_note must be at least 1".into(),
            ));
        }
        if self.notes_per_archetype.contains(&0) {
            return Err(Error::Contract("every archetype needs at least one note".into()));
        }
        if self.votes_per_note > self.num_users() {
            return Err(Error::Contract(format!(
                "votes_per_note {} exceeds the {} simulated users",
                self.votes_per_note,
                self.num_users()
            )));
        }
        self.approval.validate()
    }
}

/// Planted labels for every generated user and note, in generation order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    pub note_archetype: IndexMap<String, Archetype>,
    pub user_group: IndexMap<String, Group>,
}

fn entity_id(prefix: char, i: usize, total: usize) -> String {
    let width = total.saturating_sub(1).to_string().len().max(4);
    format!("{prefix}{i:0width$}")
}

/// Generates a polarized vote dataset and the labels it was planted with.
///
/// Users are `u…` (group A first, then B) and notes `n…` (bridging, then
/// partisan A, then partisan B). Every user and note is registered, even if
/// sampling leaves it without votes. Each note's raters are drawn without
/// replacement, `ceil(v/2)` from A and `floor(v/2)` from B.
pub fn generate(cfg: &SimulationConfig) -> Result<(RatingsDataset, GroundTruth)> {
    cfg.validate()?;
    let upg = cfg.users_per_group;
    let mut b = DatasetBuilder::new(DuplicatePolicy::Reject);
    let mut truth = GroundTruth::default();

    let mut group_members: [Vec<String>; 2] = [Vec::new(), Vec::new()];
    for (g, group) in [Group::A, Group::B].into_iter().enumerate() {
        for i in 0..upg {
            let id = entity_id('u', g * upg + i, cfg.num_users());
            b.add_user(&id)?;
            truth.user_group.insert(id.clone(), group);
            group_members[g].push(id);
        }
    }
    let mut notes = Vec::with_capacity(cfg.num_notes());
    for arch in Archetype::ALL {
        for _ in 0..cfg.notes_of(arch) {
            let id = entity_id('n', notes.len(), cfg.num_notes());
            b.add_note(&id)?;
            truth.note_archetype.insert(id.clone(), arch);
            notes.push((id, arch));
        }
    }

    let quota = [cfg.votes_per_note.div_ceil(2), cfg.votes_per_note / 2];
    let mut rng = stream_rng(cfg.seed, stream::GENERATE);
    for (note_id, arch) in &notes {
        for group in [Group::A, Group::B] {
            let members = &group_members[group.index()];
            let p = cfg.approval.get(*arch, group);
            for i in sample(&mut rng, upg, quota[group.index()]) {
                let rating = draw_vote(&mut rng, p);
                b.push(&members[i], note_id, rating)?;
            }
        }
    }
    Ok((b.finish(), truth))
}

fn draw_vote(rng: &mut ChaCha8Rng, p_approve: f64) -> f64 {
    if rng.random::<f64>() < p_approve {
        1.0
    } else {
        -1.0
    }
}

/// A coordinated group of new accounts pushing one note.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackConfig {
    pub target_note: String,
    pub injected_raters: usize,
    /// +1 to promote the target, -1 to bury it.
    pub injected_rating: f64,
    /// The group whose voting pattern camouflage votes imitate.
    pub rater_group_alignment: Group,
    pub camouflage_votes_per_sybil: usize,
    /// Approval probabilities the camouflage votes are drawn from.
    pub approval: ApprovalTable,
}

impl AttackConfig {
    pub fn new(target_note: impl Into<String>) -> Self {
        AttackConfig {
            target_note: target_note.into(),
            injected_raters: 100,
            injected_rating: 1.0,
            rater_group_alignment: Group::B,
            camouflage_votes_per_sybil: 0,
            approval: ApprovalTable::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.injected_rating != 1.0 && self.injected_rating != -1.0 {
            return Err(Error::Contract(format!(
                "injected rating must be +1 or -1, got {}",
                self.injected_rating
            )));
        }
        self.approval.validate()
    }
}

/// The first note planted with `archetype`, if any.
pub fn first_note_of(truth: &GroundTruth, archetype: Archetype) -> Option<&str> {
    truth
        .note_archetype
        .iter()
        .find(|(_, a)| **a == archetype)
        .map(|(id, _)| id.as_str())
}

/// Returns a copy of `data` with sybil raters appended.
///
/// Sybils are new users `s…`. Each rates the target with the injected
/// rating, then casts camouflage votes on distinct other notes with known
/// archetype, voting as a member of the aligned group would.
pub fn inject_attack(
    data: &RatingsDataset,
    truth: &GroundTruth,
    atk: &AttackConfig,
    seed: u64,
) -> Result<RatingsDataset> {
    atk.validate()?;
    if data.note_index(&atk.target_note).is_none() {
        return Err(Error::Contract(format!(
            "attack target {:?} is not in the dataset",
            atk.target_note
        )));
    }
    let candidates: Vec<(&str, Archetype)> = truth
        .note_archetype
        .iter()
        .filter(|(id, _)| **id != atk.target_note && data.note_index(id).is_some())
        .map(|(id, a)| (id.as_str(), *a))
        .collect();
    if atk.camouflage_votes_per_sybil > candidates.len() {
        return Err(Error::Contract(format!(
            "{} camouflage votes per sybil requested but only {} other notes",
            atk.camouflage_votes_per_sybil,
            candidates.len()
        )));
    }

    let mut rng = stream_rng(seed, stream::ATTACK);
    let mut b = data.to_builder(DuplicatePolicy::Reject);
    for s in 0..atk.injected_raters {
        let id = entity_id('s', s, atk.injected_raters);
        if data.user_index(&id).is_some() {
            return Err(Error::Contract(format!(
                "sybil id {id:?} collides with an existing user"
            )));
        }
        b.push(&id, &atk.target_note, atk.injected_rating)?;
        for i in sample(&mut rng, candidates.len(), atk.camouflage_votes_per_sybil) {
            let (note, arch) = candidates[i];
            let p = atk.approval.get(arch, atk.rater_group_alignment);
            let rating = draw_vote(&mut rng, p);
            b.push(&id, note, rating)?;
        }
    }
    Ok(b.finish())
}

/// How well fitted scores recover the planted archetypes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryMetrics {
    /// Lowest bridging intercept minus highest partisan intercept.
    pub separation_margin: f64,
    /// Probability a random bridging note outranks a random partisan note
    /// by intercept, ties counting one half.
    pub auc: f64,
    /// Mean |factor| per archetype, `None` when no such notes are planted.
    pub mean_abs_factor: [Option<f64>; 3],
    /// Mean |factor| over all partisan notes.
    pub mean_abs_factor_partisan: f64,
}

impl RecoveryMetrics {
    pub fn mean_abs_factor_of(&self, archetype: Archetype) -> Option<f64> {
        self.mean_abs_factor[archetype.index()]
    }
}

pub fn evaluate_recovery(scores: &[NoteScore], truth: &GroundTruth) -> Result<RecoveryMetrics> {
    let by_id: std::collections::HashMap<&str, &NoteScore> = scores.iter().map(|s| (s.note_id.as_str(), s)).collect();

    let mut bridging = Vec::new();
    let mut partisan = Vec::new();
    let mut abs_factor: [Vec<f64>; 3] = Default::default();
    let mut missing = Vec::new();
    for (id, arch) in &truth.note_archetype {
        let Some(s) = by_id.get(id.as_str()) else {
            missing.push(id.as_str());
            continue;
        };
        if arch.is_partisan() {
            partisan.push(s.intercept);
        } else {
            bridging.push(s.intercept);
        }
        abs_factor[arch.index()].push(s.factor.abs());
    }
    if !missing.is_empty() {
        return Err(Error::Contract(format!(
            "{} planted notes have no score (first: {:?})",
            missing.len(),
            missing[0]
        )));
    }
    if bridging.is_empty() || partisan.is_empty() {
        return Err(Error::Contract(
            "recovery needs at least one bridging and one partisan note".into(),
        ));
    }

    let min_bridging = bridging.iter().copied().fold(f64::INFINITY, f64::min);
    let max_partisan = partisan.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut wins = 0.0;
    for &b in &bridging {
        for &p in &partisan {
            if b > p {
                wins += 1.0;
            } else if b == p {
                wins += 0.5;
            }
        }
    }
    let auc = wins / (bridging.len() * partisan.len()) as f64;

    let mean = |xs: &[f64]| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    let partisan_factors: Vec<f64> = abs_factor[1].iter().chain(&abs_factor[2]).copied().collect();

    Ok(RecoveryMetrics {
        separation_margin: min_bridging - max_partisan,
        auc,
        mean_abs_factor: [mean(&abs_factor[0]), mean(&abs_factor[1]), mean(&abs_factor[2])],
        mean_abs_factor_partisan: mean(&partisan_factors).expect("partisan notes present"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SimulationConfig {
        SimulationConfig {
            users_per_group: 10,
            notes_per_archetype: [3, 2, 2],
            votes_per_note: 7,
            ..Default::default()
        }
    }

    fn score(id: &str, intercept: f64, factor: f64) -> NoteScore {
        NoteScore {
            note_id: id.into(),
            intercept,
            factor,
            vote_count: 10,
        }
    }

    fn labelled(labels: &[(&str, Archetype)]) -> GroundTruth {
        GroundTruth {
            note_archetype: labels.iter().map(|(id, a)| (id.to_string(), *a)).collect(),
            user_group: IndexMap::new(),
        }
    }

    #[test]
    fn counts_match_config() {
        let cfg = small_cfg();
        let (d, truth) = generate(&cfg).unwrap();
        assert_eq!(d.num_users(), 20);
        assert_eq!(d.num_notes(), 7);
        assert_eq!(d.num_votes(), 7 * 7);
        assert_eq!(truth.user_group.len(), 20);
        assert_eq!(truth.note_archetype.len(), 7);
        assert!(d.note_vote_counts().iter().all(|&c| c == 7));
    }

    #[test]
    fn raters_split_across_groups() {
        let (d, truth) = generate(&small_cfg()).unwrap();
        for n in 0..d.num_notes() {
            let a = d
                .votes()
                .iter()
                .filter(|v| v.note == n)
                .filter(|v| truth.user_group[d.user_id(v.user).unwrap()] == Group::A)
                .count();
            assert_eq!(a, 4);
        }
    }

    #[test]
    fn certain_approval_gives_all_ones() {
        let cfg = SimulationConfig {
            approval: ApprovalTable::uniform(1.0),
            ..small_cfg()
        };
        let (d, _) = generate(&cfg).unwrap();
        assert!(d.votes().iter().all(|v| v.rating == 1.0));
    }

    #[test]
    fn too_many_votes_per_note() {
        let cfg = SimulationConfig {
            votes_per_note: 21,
            ..small_cfg()
        };
        assert!(matches!(generate(&cfg), Err(Error::Contract(_))));
        let full = SimulationConfig {
            votes_per_note: 20,
            ..small_cfg()
        };
        assert!(generate(&full).is_ok());
    }

    #[test]
    fn bad_probability_rejected() {
        let mut cfg = small_cfg();
        cfg.approval.set(Archetype::PartisanA, Group::B, 1.2);
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn seeded() {
        let cfg = small_cfg();
        assert_eq!(generate(&cfg).unwrap().0, generate(&cfg).unwrap().0);
        let other = SimulationConfig { seed: 1, ..cfg };
        assert_ne!(generate(&cfg).unwrap().0, generate(&other).unwrap().0);
    }

    #[test]
    fn relabel_table_swaps_cells() {
        assert_eq!(ApprovalTable::default().relabeled(), ApprovalTable::default());
        let mut t = ApprovalTable::default();
        t.set(Archetype::PartisanA, Group::A, 0.7);
        t.set(Archetype::Bridging, Group::B, 0.6);
        let r = t.relabeled();
        assert_eq!(r.get(Archetype::PartisanB, Group::B), 0.7);
        assert_eq!(r.get(Archetype::PartisanA, Group::A), 0.9);
        assert_eq!(r.get(Archetype::Bridging, Group::A), 0.6);
        assert_eq!(r.relabeled(), t);
    }

    #[test]
    fn attack_identity_and_counting() {
        let (d, truth) = generate(&small_cfg()).unwrap();
        let target = first_note_of(&truth, Archetype::PartisanB).unwrap().to_owned();

        let mut atk = AttackConfig::new(&target);
        atk.injected_raters = 0;
        assert_eq!(inject_attack(&d, &truth, &atk, 5).unwrap(), d);

        atk.injected_raters = 12;
        let attacked = inject_attack(&d, &truth, &atk, 5).unwrap();
        assert_eq!(attacked.num_votes(), d.num_votes() + 12);
        assert_eq!(attacked.num_users(), d.num_users() + 12);
        let t = attacked.note_index(&target).unwrap();
        assert!(attacked.votes()[d.num_votes()..]
            .iter()
            .all(|v| v.note == t && v.rating == 1.0));
        assert_eq!(&attacked.votes()[..d.num_votes()], d.votes());
    }

    #[test]
    fn camouflage_avoids_target_and_repeats() {
        let (d, truth) = generate(&small_cfg()).unwrap();
        let target = first_note_of(&truth, Archetype::PartisanA).unwrap().to_owned();
        let mut atk = AttackConfig::new(&target);
        atk.injected_raters = 5;
        atk.camouflage_votes_per_sybil = 6;
        let attacked = inject_attack(&d, &truth, &atk, 1).unwrap();
        assert_eq!(attacked.num_votes(), d.num_votes() + 5 * 7);
        let t = attacked.note_index(&target).unwrap();
        let on_target = attacked.votes()[d.num_votes()..].iter().filter(|v| v.note == t).count();
        assert_eq!(on_target, 5);

        atk.camouflage_votes_per_sybil = 7;
        assert!(inject_attack(&d, &truth, &atk, 1).is_err());
    }

    #[test]
    fn attack_errors() {
        let (d, truth) = generate(&small_cfg()).unwrap();
        assert!(inject_attack(&d, &truth, &AttackConfig::new("nope"), 0).is_err());
        let mut atk = AttackConfig::new("n0000");
        atk.injected_rating = 0.5;
        assert!(inject_attack(&d, &truth, &atk, 0).is_err());
    }

    #[test]
    fn perfect_separation_auc() {
        use Archetype::*;
        let truth = labelled(&[("b1", Bridging), ("b2", Bridging), ("p1", PartisanA), ("p2", PartisanB)]);
        let scores = [
            score("b1", 0.6, 0.1),
            score("b2", 0.5, -0.1),
            score("p1", 0.0, 0.9),
            score("p2", -0.1, -0.7),
        ];
        let m = evaluate_recovery(&scores, &truth).unwrap();
        assert_eq!(m.auc, 1.0);
        assert!((m.separation_margin - 0.5).abs() < 1e-15);
        assert!((m.mean_abs_factor_of(Bridging).unwrap() - 0.1).abs() < 1e-15);
        assert!((m.mean_abs_factor_partisan - 0.8).abs() < 1e-15);
    }

    #[test]
    fn ties_count_half() {
        use Archetype::*;
        let truth = labelled(&[("b", Bridging), ("p", PartisanA), ("q", PartisanB)]);
        let scores = [score("b", 0.2, 0.0), score("p", 0.2, 0.0), score("q", 0.2, 0.0)];
        let m = evaluate_recovery(&scores, &truth).unwrap();
        assert_eq!(m.auc, 0.5);
        assert_eq!(m.separation_margin, 0.0);
    }

    #[test]
    fn missing_scores_rejected() {
        use Archetype::*;
        let truth = labelled(&[("b", Bridging), ("p", PartisanA)]);
        assert!(evaluate_recovery(&[score("b", 0.1, 0.0)], &truth).is_err());
        let only_bridging = labelled(&[("b", Bridging)]);
        assert!(evaluate_recovery(&[score("b", 0.1, 0.0)], &only_bridging).is_err());
    }
}
