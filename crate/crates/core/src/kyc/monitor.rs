//! Ongoing transaction monitoring: rolling-volume and structuring
//! detection over the logical clock, plus the re-proof due check.

use crate::clock::Tick;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionRecord {
    pub tick: Tick,
    pub amount: u64,
    pub counterparty: String,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitoringConfig {
    /// Rolling window for the volume rule, in ticks.
    pub volume_window: Tick,
    /// Alert when the window's sum exceeds multiplier x expected volume.
    pub volume_multiplier: u64,
    pub reporting_threshold: u64,
    /// Alert on >= this many just-under-threshold transactions...
    pub structuring_count: usize,
    /// ...inside this window.
    pub structuring_window: Tick,
}

impl Default for MonitoringConfig {
    fn default() -> Self {
        MonitoringConfig {
            volume_window: 30,
            volume_multiplier: 3,
            reporting_threshold: 10_000,
            structuring_count: 3,
            structuring_window: 72,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Alert {
    VolumeExceeded {
        window_end: Tick,
        total: u64,
        limit: u64,
    },
    Structuring {
        window_start: Tick,
        window_end: Tick,
        count: usize,
    },
    ReproofFailed {
        detail: String,
    },
}

impl Alert {
    pub fn code(&self) -> &'static str {
        match self {
            Alert::VolumeExceeded { .. } => "VolumeExceeded",
            Alert::Structuring { .. } => "Structuring",
            Alert::ReproofFailed { .. } => "ReproofFailed",
        }
    }
}

/// Amounts within 10% below the reporting threshold (and under it).
fn just_under_threshold(amount: u64, threshold: u64) -> bool {
    amount < threshold && amount * 10 >= threshold * 9
}

/// Scan a transaction history; at most one alert per rule, at the first
/// offending window, so repeated scans stay deterministic.
pub fn scan_transactions(
    transactions: &[TransactionRecord],
    cfg: &MonitoringConfig,
    expected_monthly_volume: u64,
) -> Vec<Alert> {
    let mut alerts = Vec::new();
    let limit = cfg.volume_multiplier * expected_monthly_volume;
    for tx in transactions {
        let window_start = tx.tick.saturating_sub(cfg.volume_window.saturating_sub(1));
        let total: u64 = transactions
            .iter()
            .filter(|t| t.tick >= window_start && t.tick <= tx.tick)
            .map(|t| t.amount)
            .sum();
        if total > limit {
            alerts.push(Alert::VolumeExceeded {
                window_end: tx.tick,
                total,
                limit,
            });
            break;
        }
    }
    'outer: for tx in transactions {
        if !just_under_threshold(tx.amount, cfg.reporting_threshold) {
            continue;
        }
        let window_start = tx.tick;
        let window_end = tx.tick + cfg.structuring_window - 1;
        let count = transactions
            .iter()
            .filter(|t| {
                t.tick >= window_start
                    && t.tick <= window_end
                    && just_under_threshold(t.amount, cfg.reporting_threshold)
            })
            .count();
        if count >= cfg.structuring_count {
            alerts.push(Alert::Structuring {
                window_start,
                window_end,
                count,
            });
            break 'outer;
        }
    }
    alerts
}

/// A re-proof is due when a seen credential's expiration has passed or the
/// re-proof interval has elapsed since the last one (or since opening).
pub fn reproof_due(
    last_reproof: Option<Tick>,
    opened_at: Tick,
    credential_expiration: Option<Tick>,
    reproof_interval: Tick,
    now: Tick,
) -> bool {
    if credential_expiration.is_some_and(|exp| now >= exp) {
        return true;
    }
    let base = last_reproof.unwrap_or(opened_at);
    now >= base + reproof_interval
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tx(tick: Tick, amount: u64) -> TransactionRecord {
        TransactionRecord {
            tick,
            amount,
            counterparty: "shop".into(),
            direction: Direction::In,
        }
    }

    #[test]
    fn steady_small_transactions_raise_nothing() {
        let cfg = MonitoringConfig::default();
        let txs: Vec<_> = (0..50).map(|i| tx(i * 2, 100)).collect();
        assert!(scan_transactions(&txs, &cfg, 1000).is_empty());
    }

    #[test]
    fn structuring_three_deposits_just_under_threshold() {
        let cfg = MonitoringConfig::default();
        // 3 deposits of 9,500 against a 10,000 threshold inside 72 ticks
        let txs = vec![tx(10, 9_500), tx(30, 9_500), tx(75, 9_500)];
        let alerts = scan_transactions(&txs, &cfg, 1_000_000);
        assert_eq!(alerts.len(), 1);
        match &alerts[0] {
            Alert::Structuring { count, window_start, .. } => {
                assert_eq!(*count, 3);
                assert_eq!(*window_start, 10);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn structuring_respects_window_and_band_via_oracle() {
        // oracle: brute-force sliding window over all start ticks
        fn oracle(txs: &[TransactionRecord], cfg: &MonitoringConfig) -> bool {
            let max_tick = txs.iter().map(|t| t.tick).max().unwrap_or(0);
            for start in 0..=max_tick {
                let count = txs
                    .iter()
                    .filter(|t| {
                        t.tick >= start
                            && t.tick < start + cfg.structuring_window
                            && t.amount < cfg.reporting_threshold
                            && t.amount * 10 >= cfg.reporting_threshold * 9
                    })
                    .count();
                if count >= cfg.structuring_count {
                    return true;
                }
            }
            false
        }
        let cfg = MonitoringConfig::default();
        let cases: Vec<Vec<TransactionRecord>> = vec![
            // spread beyond the window: no alert
            vec![tx(0, 9_500), tx(73, 9_500), tx(146, 9_500)],
            // third deposit exactly at the window edge
            vec![tx(0, 9_500), tx(30, 9_500), tx(71, 9_500)],
            // amounts below the 10% band do not count
            vec![tx(0, 8_999), tx(10, 8_000), tx(20, 8_999)],
            // exactly at the threshold is reportable, not structuring
            vec![tx(0, 10_000), tx(10, 10_000), tx(20, 10_000)],
            // boundary of the band: 9,000 counts
            vec![tx(0, 9_000), tx(10, 9_000), tx(20, 9_000)],
        ];
        for (i, txs) in cases.iter().enumerate() {
            let got = scan_transactions(txs, &cfg, u64::MAX / 8)
                .iter()
                .any(|a| a.code() == "Structuring");
            assert_eq!(got, oracle(txs, &cfg), "case {i}");
        }
    }

    #[test]
    fn volume_rule_uses_rolling_window() {
        let cfg = MonitoringConfig::default();
        // expected 1,000/month; limit 3,000 per 30 ticks
        let quiet = vec![tx(0, 1_500), tx(40, 1_500)];
        assert!(scan_transactions(&quiet, &cfg, 1_000).is_empty());

        let burst = vec![tx(0, 1_500), tx(10, 1_500), tx(20, 500)];
        let alerts = scan_transactions(&burst, &cfg, 1_000);
        assert_eq!(alerts.len(), 1);
        match &alerts[0] {
            Alert::VolumeExceeded { total, limit, window_end } => {
                assert_eq!(*total, 3_500);
                assert_eq!(*limit, 3_000);
                assert_eq!(*window_end, 20);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reproof_schedule() {
        assert!(!reproof_due(None, 100, Some(500), 360, 200));
        assert!(reproof_due(None, 100, Some(500), 360, 500)); // expiration passed
        assert!(reproof_due(None, 100, None, 360, 460)); // interval since opening
        assert!(!reproof_due(Some(400), 100, None, 360, 500)); // interval resets
        assert!(reproof_due(Some(400), 100, None, 360, 760));
    }
}
