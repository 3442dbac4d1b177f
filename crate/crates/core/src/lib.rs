//! Deterministic, desk-scale simulation of SSI-based eKYC: hash-chained
//! public ledgers that never hold personal data, edge wallets holding
//! credentials, pairwise encrypted channels, selective-disclosure
//! presentations, and the bank-side onboarding/screening/monitoring
//! processes — all driven by a logical clock and one seeded random source
//! so every run is reproducible byte for byte.

pub mod anoncred;
pub mod clock;
pub mod connect;
pub mod crypto;
pub mod enc;
pub mod kyc;
pub mod ledger;
pub mod scenario;
pub mod trace;
