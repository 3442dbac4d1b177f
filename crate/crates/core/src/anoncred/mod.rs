//! Credential lifecycle: schemas, credential definitions, offers,
//! blinded-link-secret requests, issuance, revocation, proof requests,
//! selective-disclosure presentations, and verification.

pub mod credential;
pub mod issue;
pub mod objects;
pub mod present;
pub mod verify;
