//! Bilateral authenticated-encrypted channels built from a DID-exchange
//! style handshake. Handshake messages are sealed to the recipient's
//! public key so that mailboxes only ever queue ciphertext; established
//! channels use a DH-derived shared key with strictly increasing sequence
//! numbers as replay protection.

use super::did::Did;
use crate::crypto::{sha256, GroupParams, KeyPair};
use crate::enc::{Dec, DecodeError, Enc};
use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::ChaCha20Poly1305;
use num_bigint::BigUint;
use rand::RngCore;
use thiserror::Error;

pub const INVITE_NONCE_LEN: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChannelError {
    #[error("envelope failed authentication")]
    AuthFailure,
    #[error("replayed or reordered envelope (seq {seq} <= last seen {last})")]
    ReplayDetected { seq: u64, last: u64 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConnectError {
    #[error("could not resolve inviter: {0}")]
    ResolutionFailed(String),
    #[error("inviter key attestation invalid: {0}")]
    AttestationInvalid(String),
    #[error("handshake mismatch")]
    HandshakeMismatch,
}

fn aead_encrypt(key: &[u8; 32], nonce: &[u8; 12], aad: &[u8], plaintext: &[u8]) -> Vec<u8> {
    let cipher = ChaCha20Poly1305::new(&(*key).into());
    cipher
        .encrypt(&chacha20poly1305::Nonce::from(*nonce), Payload { msg: plaintext, aad })
        .expect("encryption is infallible for in-memory buffers")
}

fn aead_decrypt(key: &[u8; 32], nonce: &[u8; 12], aad: &[u8], ciphertext: &[u8]) -> Option<Vec<u8>> {
    let cipher = ChaCha20Poly1305::new(&(*key).into());
    cipher
        .decrypt(&chacha20poly1305::Nonce::from(*nonce), Payload { msg: ciphertext, aad })
        .ok()
}

fn dh(group: &GroupParams, own_sk: &BigUint, their_pk: &BigUint) -> BigUint {
    their_pk.modpow(own_sk, &group.p)
}

/// Channel key for one side: DH with the counterparty's pairwise key, then
/// hashed together with both pairwise DIDs.
pub fn derive_channel_key(
    group: &GroupParams,
    own_sk: &BigUint,
    their_pk: &BigUint,
    my_did: &Did,
    their_did: &Did,
) -> [u8; 32] {
    channel_key(&dh(group, own_sk, their_pk), my_did, their_did)
}

/// Channel key: hash of the DH secret and both pairwise DIDs in a fixed
/// (sorted) order, so both ends derive the same bytes.
fn channel_key(shared: &BigUint, did_a: &Did, did_b: &Did) -> [u8; 32] {
    let (lo, hi) = if did_a.to_string() <= did_b.to_string() {
        (did_a, did_b)
    } else {
        (did_b, did_a)
    };
    let mut e = Enc::new();
    e.put_str("sim.dh.v1");
    e.put_int(shared);
    e.put_str(&lo.to_string());
    e.put_str(&hi.to_string());
    sha256(&e.into_bytes())
}

/// A one-directional sealed message to a known public key: ephemeral DH
/// plus AEAD. Used for handshake transport before a channel exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedEnvelope {
    pub eph_pk: BigUint,
    pub nonce: [u8; 12],
    pub ciphertext: Vec<u8>,
}

const SEAL_AAD: &[u8] = b"sim.seal.v1";

fn seal_key(group: &GroupParams, shared: &BigUint, eph_pk: &BigUint, recipient_pk: &BigUint) -> [u8; 32] {
    let _ = group;
    let mut e = Enc::new();
    e.put_str("sim.seal.v1");
    e.put_int(shared);
    e.put_int(eph_pk);
    e.put_int(recipient_pk);
    sha256(&e.into_bytes())
}

pub fn seal_to<R: RngCore>(
    group: &GroupParams,
    recipient_pk: &BigUint,
    plaintext: &[u8],
    rng: &mut R,
) -> SealedEnvelope {
    let eph_sk = group.rand_nonzero_scalar(rng);
    let eph_pk = group.g.modpow(&eph_sk, &group.p);
    let key = seal_key(group, &dh(group, &eph_sk, recipient_pk), &eph_pk, recipient_pk);
    let mut nonce = [0u8; 12];
    rng.fill_bytes(&mut nonce);
    SealedEnvelope {
        eph_pk,
        nonce,
        ciphertext: aead_encrypt(&key, &nonce, SEAL_AAD, plaintext),
    }
}

pub fn open_sealed(
    group: &GroupParams,
    recipient: &KeyPair,
    env: &SealedEnvelope,
) -> Option<Vec<u8>> {
    let key = seal_key(
        group,
        &dh(group, &recipient.sk, &env.eph_pk),
        &env.eph_pk,
        &recipient.pk,
    );
    aead_decrypt(&key, &env.nonce, SEAL_AAD, &env.ciphertext)
}

impl SealedEnvelope {
    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.sealed.v1");
        e.put_int(&self.eph_pk);
        e.put_bytes(&self.nonce);
        e.put_bytes(&self.ciphertext);
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("sim.sealed.v1")?;
        let eph_pk = d.int()?;
        let nonce = d.fixed()?;
        let ciphertext = d.bytes()?.to_vec();
        d.finish()?;
        Ok(SealedEnvelope {
            eph_pk,
            nonce,
            ciphertext,
        })
    }
}

/// One side of an established pairwise channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    pub my_peer_did: Did,
    pub their_peer_did: Did,
    pub my_key: KeyPair,
    pub their_public_key: BigUint,
    pub their_endpoint: String,
    pub shared_key: [u8; 32],
    pub send_seq: u64,
    pub recv_seq: u64,
    /// Holder opted in to pushing updated credentials over this channel.
    pub update_push: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub sender: Did,
    pub seq: u64,
    pub nonce: [u8; 12],
    pub ciphertext: Vec<u8>,
}

impl Envelope {
    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.env.v1");
        e.put_str(&self.sender.to_string());
        e.put_u64(self.seq);
        e.put_bytes(&self.nonce);
        e.put_bytes(&self.ciphertext);
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("sim.env.v1")?;
        let sender = Did::parse(d.str()?)
            .ok_or_else(|| DecodeError::Invalid("bad sender did".into()))?;
        let seq = d.u64()?;
        let nonce = d.fixed()?;
        let ciphertext = d.bytes()?.to_vec();
        d.finish()?;
        Ok(Envelope {
            sender,
            seq,
            nonce,
            ciphertext,
        })
    }
}

fn envelope_aad(sender: &Did, seq: u64) -> Vec<u8> {
    let mut e = Enc::new();
    e.put_str("sim.env.aad.v1");
    e.put_str(&sender.to_string());
    e.put_u64(seq);
    e.into_bytes()
}

/// Encrypt under the channel key with associated data (sender DID, seq).
pub fn send<R: RngCore>(conn: &mut Connection, plaintext: &[u8], rng: &mut R) -> Envelope {
    conn.send_seq += 1;
    let mut nonce = [0u8; 12];
    rng.fill_bytes(&mut nonce);
    let aad = envelope_aad(&conn.my_peer_did, conn.send_seq);
    Envelope {
        sender: conn.my_peer_did.clone(),
        seq: conn.send_seq,
        nonce,
        ciphertext: aead_encrypt(&conn.shared_key, &nonce, &aad, plaintext),
    }
}

/// Reject replays and reorders (seq must exceed the last seen), then
/// authenticate and decrypt.
pub fn recv(conn: &mut Connection, env: &Envelope) -> Result<Vec<u8>, ChannelError> {
    if env.seq <= conn.recv_seq {
        return Err(ChannelError::ReplayDetected {
            seq: env.seq,
            last: conn.recv_seq,
        });
    }
    if env.sender != conn.their_peer_did {
        return Err(ChannelError::AuthFailure);
    }
    let aad = envelope_aad(&env.sender, env.seq);
    let plaintext = aead_decrypt(&conn.shared_key, &env.nonce, &aad, &env.ciphertext)
        .ok_or(ChannelError::AuthFailure)?;
    conn.recv_seq = env.seq;
    Ok(plaintext)
}

/// First handshake message, sealed to the inviter's key. Carries the
/// requester's cloud-mailbox address: nothing else tells the inviter where
/// to reach a party it has never met.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionRequest {
    pub requester_peer_did: Did,
    pub requester_public_key: BigUint,
    pub requester_endpoint: String,
    pub invitation_nonce: [u8; INVITE_NONCE_LEN],
}

impl ConnectionRequest {
    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.connreq.v1");
        e.field("did").put_str(&self.requester_peer_did.to_string());
        e.field("key").put_int(&self.requester_public_key);
        e.field("endpoint").put_str(&self.requester_endpoint);
        e.field("invitation").put_bytes(&self.invitation_nonce);
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("sim.connreq.v1")?;
        d.field("did")?;
        let requester_peer_did = Did::parse(d.str()?)
            .ok_or_else(|| DecodeError::Invalid("bad did".into()))?;
        d.field("key")?;
        let requester_public_key = d.int()?;
        d.field("endpoint")?;
        let requester_endpoint = d.str()?.to_string();
        d.field("invitation")?;
        let invitation_nonce = d.fixed()?;
        d.finish()?;
        Ok(ConnectionRequest {
            requester_peer_did,
            requester_public_key,
            requester_endpoint,
            invitation_nonce,
        })
    }
}

/// Second handshake message, sealed back to the requester's fresh pairwise
/// key. The confirm tag proves the responder derived the same channel key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionResponse {
    pub responder_peer_did: Did,
    pub responder_public_key: BigUint,
    pub responder_endpoint: String,
    pub confirm_tag: [u8; 32],
}

impl ConnectionResponse {
    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.connresp.v1");
        e.field("did").put_str(&self.responder_peer_did.to_string());
        e.field("key").put_int(&self.responder_public_key);
        e.field("endpoint").put_str(&self.responder_endpoint);
        e.field("confirm").put_bytes(&self.confirm_tag);
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("sim.connresp.v1")?;
        d.field("did")?;
        let responder_peer_did = Did::parse(d.str()?)
            .ok_or_else(|| DecodeError::Invalid("bad did".into()))?;
        d.field("key")?;
        let responder_public_key = d.int()?;
        d.field("endpoint")?;
        let responder_endpoint = d.str()?.to_string();
        d.field("confirm")?;
        let confirm_tag = d.fixed()?;
        d.finish()?;
        Ok(ConnectionResponse {
            responder_peer_did,
            responder_public_key,
            responder_endpoint,
            confirm_tag,
        })
    }
}

pub fn confirm_tag(
    shared_key: &[u8; 32],
    request_bytes: &[u8],
    responder_did: &Did,
    responder_pk: &BigUint,
) -> [u8; 32] {
    let mut e = Enc::new();
    e.put_str("sim.confirm.v1");
    e.put_bytes(shared_key);
    e.put_bytes(request_bytes);
    e.put_str(&responder_did.to_string());
    e.put_int(responder_pk);
    sha256(&e.into_bytes())
}
