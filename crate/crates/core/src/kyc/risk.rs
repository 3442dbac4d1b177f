//! The risk engine: a weighted score over screening hits and the customer
//! profile, classified into low, standard, or high. Weights and thresholds
//! are config-overridable; the defaults below are frozen for the tests.

use super::screening::{ListKind, ScreeningHit};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskConfig {
    pub terror_aml_weight: u32,
    pub pep_weight: u32,
    pub negative_press_weight: u32,
    pub high_risk_country_weight: u32,
    pub high_volume_weight: u32,
    /// score < standard_min is low; < high_min is standard; else high
    pub standard_min: u32,
    pub high_min: u32,
    pub volume_threshold: u64,
    pub high_risk_countries: BTreeSet<String>,
}

impl Default for RiskConfig {
    fn default() -> Self {
        RiskConfig {
            terror_aml_weight: 100,
            pep_weight: 30,
            negative_press_weight: 10,
            high_risk_country_weight: 15,
            high_volume_weight: 10,
            standard_min: 20,
            high_min: 50,
            volume_threshold: 10_000,
            high_risk_countries: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RiskLevel {
    Low,
    Standard,
    High,
}

impl RiskLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            RiskLevel::Low => "low",
            RiskLevel::Standard => "standard",
            RiskLevel::High => "high",
        }
    }

    pub fn bump(self) -> RiskLevel {
        match self {
            RiskLevel::Low => RiskLevel::Standard,
            _ => RiskLevel::High,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiskFactor {
    TerrorOrAmlHit,
    PepHit,
    NegativePressHit,
    HighRiskCountry,
    HighExpectedVolume,
    ReproofFailed,
}

impl RiskFactor {
    pub fn as_str(self) -> &'static str {
        match self {
            RiskFactor::TerrorOrAmlHit => "terror_or_aml_hit",
            RiskFactor::PepHit => "pep_hit",
            RiskFactor::NegativePressHit => "negative_press_hit",
            RiskFactor::HighRiskCountry => "high_risk_country",
            RiskFactor::HighExpectedVolume => "high_expected_volume",
            RiskFactor::ReproofFailed => "reproof_failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RiskAssessment {
    pub score: u32,
    pub level: RiskLevel,
    pub factors: Vec<RiskFactor>,
}

/// What the bank knows about the customer before scoring.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CustomerProfile {
    pub country: Option<String>,
    pub expected_monthly_volume: u64,
}

pub fn level_for_score(score: u32, cfg: &RiskConfig) -> RiskLevel {
    if score < cfg.standard_min {
        RiskLevel::Low
    } else if score < cfg.high_min {
        RiskLevel::Standard
    } else {
        RiskLevel::High
    }
}

pub fn has_blocking_hit(hits: &[ScreeningHit]) -> bool {
    hits.iter().any(|h| h.list.is_blocking())
}

pub fn assess_risk(
    hits: &[ScreeningHit],
    profile: &CustomerProfile,
    cfg: &RiskConfig,
) -> RiskAssessment {
    let mut score = 0u32;
    let mut factors = Vec::new();
    if has_blocking_hit(hits) {
        score += cfg.terror_aml_weight;
        factors.push(RiskFactor::TerrorOrAmlHit);
    }
    if hits.iter().any(|h| h.list == ListKind::Pep) {
        score += cfg.pep_weight;
        factors.push(RiskFactor::PepHit);
    }
    if hits.iter().any(|h| h.list == ListKind::NegativePress) {
        score += cfg.negative_press_weight;
        factors.push(RiskFactor::NegativePressHit);
    }
    if profile
        .country
        .as_ref()
        .is_some_and(|c| cfg.high_risk_countries.contains(c))
    {
        score += cfg.high_risk_country_weight;
        factors.push(RiskFactor::HighRiskCountry);
    }
    if profile.expected_monthly_volume > cfg.volume_threshold {
        score += cfg.high_volume_weight;
        factors.push(RiskFactor::HighExpectedVolume);
    }
    RiskAssessment {
        score,
        level: level_for_score(score, cfg),
        factors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kyc::screening::MatchGrade;

    fn hit(list: ListKind) -> ScreeningHit {
        ScreeningHit {
            list,
            entry: "x".into(),
            grade: MatchGrade::Exact,
        }
    }

    /// Independent recomputation of the scoring table.
    fn oracle_score(
        terror: bool,
        pep: bool,
        press: bool,
        high_country: bool,
        high_volume: bool,
    ) -> u32 {
        100 * u32::from(terror)
            + 30 * u32::from(pep)
            + 10 * u32::from(press)
            + 15 * u32::from(high_country)
            + 10 * u32::from(high_volume)
    }

    #[test]
    fn clean_profile_scores_zero() {
        let a = assess_risk(&[], &CustomerProfile::default(), &RiskConfig::default());
        assert_eq!(a.score, 0);
        assert_eq!(a.level, RiskLevel::Low);
        assert!(a.factors.is_empty());
    }

    #[test]
    fn pep_only_is_standard() {
        let a = assess_risk(
            &[hit(ListKind::Pep)],
            &CustomerProfile::default(),
            &RiskConfig::default(),
        );
        assert_eq!(a.score, oracle_score(false, true, false, false, false));
        assert_eq!(a.score, 30);
        assert_eq!(a.level, RiskLevel::Standard);
    }

    #[test]
    fn pep_plus_country_plus_volume_is_high() {
        let mut cfg = RiskConfig::default();
        cfg.high_risk_countries.insert("XX".into());
        let profile = CustomerProfile {
            country: Some("XX".into()),
            expected_monthly_volume: 20_000,
        };
        let a = assess_risk(&[hit(ListKind::Pep)], &profile, &cfg);
        assert_eq!(a.score, oracle_score(false, true, false, true, true));
        assert_eq!(a.score, 55);
        assert_eq!(a.level, RiskLevel::High);
    }

    #[test]
    fn exhaustive_table_against_oracle() {
        let mut cfg = RiskConfig::default();
        cfg.high_risk_countries.insert("XX".into());
        for bits in 0u32..32 {
            let (terror, pep, press, country, volume) = (
                bits & 1 != 0,
                bits & 2 != 0,
                bits & 4 != 0,
                bits & 8 != 0,
                bits & 16 != 0,
            );
            let mut hits = Vec::new();
            if terror {
                hits.push(hit(ListKind::Terrorism));
            }
            if pep {
                hits.push(hit(ListKind::Pep));
            }
            if press {
                hits.push(hit(ListKind::NegativePress));
            }
            let profile = CustomerProfile {
                country: country.then(|| "XX".to_string()),
                expected_monthly_volume: if volume { 10_001 } else { 10_000 },
            };
            let a = assess_risk(&hits, &profile, &cfg);
            let expected = oracle_score(terror, pep, press, country, volume);
            assert_eq!(a.score, expected, "bits={bits:05b}");
            let expected_level = if expected < 20 {
                RiskLevel::Low
            } else if expected < 50 {
                RiskLevel::Standard
            } else {
                RiskLevel::High
            };
            assert_eq!(a.level, expected_level);
            assert_eq!(has_blocking_hit(&hits), terror);
        }
    }

    #[test]
    fn aml_hit_is_blocking_too() {
        assert!(has_blocking_hit(&[hit(ListKind::Aml)]));
        assert!(!has_blocking_hit(&[hit(ListKind::Pep), hit(ListKind::NegativePress)]));
    }

    #[test]
    fn duplicate_hits_count_once() {
        let a = assess_risk(
            &[hit(ListKind::Pep), hit(ListKind::Pep)],
            &CustomerProfile::default(),
            &RiskConfig::default(),
        );
        assert_eq!(a.score, 30);
    }

    #[test]
    fn bump_saturates_at_high() {
        assert_eq!(RiskLevel::Low.bump(), RiskLevel::Standard);
        assert_eq!(RiskLevel::Standard.bump(), RiskLevel::High);
        assert_eq!(RiskLevel::High.bump(), RiskLevel::High);
    }
}
