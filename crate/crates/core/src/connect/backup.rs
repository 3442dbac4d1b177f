//! Encrypted wallet backups. Byte layout:
//!
//! ```text
//! magic "SIMWLT01" (8) | version u16 BE | kdf iterations u32 BE |
//! salt (16) | nonce (12) | AEAD ciphertext of the wallet's canonical bytes
//! ```
//!
//! The key is derived by salted iterated SHA-256 (x_0 = H(tag|salt|pass),
//! x_i = H(x_{i-1}|salt|pass), key = x_iterations); the whole header is
//! authenticated as associated data, so a flipped header byte is caught
//! before any state is restored.

use super::wallet::Wallet;
use crate::crypto::sha256;
use crate::enc::Enc;
use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::ChaCha20Poly1305;
use rand::RngCore;
use thiserror::Error;

pub const BACKUP_MAGIC: &[u8; 8] = b"SIMWLT01";
pub const BACKUP_VERSION: u16 = 1;
const HEADER_LEN: usize = 8 + 2 + 4 + 16 + 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BackupError {
    #[error("wrong passphrase")]
    WrongPassphrase,
    #[error("corrupt backup: {0}")]
    CorruptBackup(String),
}

fn derive_key(passphrase: &str, salt: &[u8; 16], iterations: u32) -> [u8; 32] {
    let mut e = Enc::new();
    e.put_str("sim.kdf.v1");
    e.put_bytes(salt);
    e.put_str(passphrase);
    let seed = e.into_bytes();
    let mut state = sha256(&seed);
    for _ in 0..iterations {
        let mut round = Vec::with_capacity(32 + seed.len());
        round.extend_from_slice(&state);
        round.extend_from_slice(&seed);
        state = sha256(&round);
    }
    state
}

pub fn export_wallet<R: RngCore>(wallet: &Wallet, passphrase: &str, rng: &mut R) -> Vec<u8> {
    let iterations = wallet.profile.kdf_iterations();
    let mut salt = [0u8; 16];
    rng.fill_bytes(&mut salt);
    let mut nonce = [0u8; 12];
    rng.fill_bytes(&mut nonce);

    let mut out = Vec::new();
    out.extend_from_slice(BACKUP_MAGIC);
    out.extend_from_slice(&BACKUP_VERSION.to_be_bytes());
    out.extend_from_slice(&iterations.to_be_bytes());
    out.extend_from_slice(&salt);
    out.extend_from_slice(&nonce);

    let key = derive_key(passphrase, &salt, iterations);
    let cipher = ChaCha20Poly1305::new(&key.into());
    let ciphertext = cipher
        .encrypt(
            &chacha20poly1305::Nonce::from(nonce),
            Payload {
                msg: &wallet.encode(),
                aad: &out,
            },
        )
        .expect("in-memory encryption");
    out.extend_from_slice(&ciphertext);
    out
}

pub fn import_wallet(bytes: &[u8], passphrase: &str) -> Result<Wallet, BackupError> {
    if bytes.len() < HEADER_LEN {
        return Err(BackupError::CorruptBackup("truncated header".into()));
    }
    let (header, ciphertext) = bytes.split_at(HEADER_LEN);
    if &header[..8] != BACKUP_MAGIC {
        return Err(BackupError::CorruptBackup("bad magic".into()));
    }
    let version = u16::from_be_bytes(header[8..10].try_into().unwrap());
    if version != BACKUP_VERSION {
        return Err(BackupError::CorruptBackup(format!(
            "unsupported version {version}"
        )));
    }
    let iterations = u32::from_be_bytes(header[10..14].try_into().unwrap());
    let salt: [u8; 16] = header[14..30].try_into().unwrap();
    let nonce: [u8; 12] = header[30..42].try_into().unwrap();

    let key = derive_key(passphrase, &salt, iterations);
    let cipher = ChaCha20Poly1305::new(&key.into());
    let plaintext = cipher
        .decrypt(
            &chacha20poly1305::Nonce::from(nonce),
            Payload {
                msg: ciphertext,
                aad: header,
            },
        )
        .map_err(|_| BackupError::WrongPassphrase)?;
    Wallet::decode(&plaintext).map_err(|e| BackupError::CorruptBackup(e.to_string()))
}
