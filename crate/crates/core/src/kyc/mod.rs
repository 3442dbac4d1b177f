//! The bank-facing process layer: the three onboarding choreographies as a
//! KYC case state machine, name screening, the risk engine, enhanced due
//! diligence, ongoing monitoring with re-proof triggers, and
//! retention-bound record keeping.

pub mod bank;
pub mod case;
pub mod documents;
pub mod flows;
pub mod monitor;
pub mod records;
pub mod risk;
pub mod screening;
