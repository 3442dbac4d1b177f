//! Edge wallets: key storage, the wallet-wide link secret (created once),
//! peer and public DIDs, held credentials, live connections, and an audit
//! log of disclosures. Everything serializes canonically so encrypted
//! backups restore the wallet bit for bit.

use super::channel::{
    confirm_tag, open_sealed, seal_to, ConnectError, Connection, ConnectionRequest,
    ConnectionResponse, SealedEnvelope, INVITE_NONCE_LEN,
};
use super::did::{attestation_message, Did, DidDocument, ServiceEndpoint, VerificationKey};
use crate::anoncred::credential::{CredentialOffer, HeldCredential, Nonce};
use crate::clock::Tick;
use crate::crypto::{verify, GroupParams, GroupProfile, KeyPair};
use crate::enc::{Dec, DecodeError, Enc};
use crate::ledger::{Ledger, LedgerError, LedgerHub, LedgerTransaction, TxKind};
use crate::crypto::sign;
use num_bigint::BigUint;
use rand::RngCore;
use std::collections::{BTreeMap, BTreeSet};

/// How an invitation names the inviter: by resolvable public DID, or
/// directly by endpoint and key (the contents of a QR code either way).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InviterInfo {
    PublicDid(Did),
    Direct { endpoint: String, public_key: BigUint },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invitation {
    pub inviter: InviterInfo,
    pub nonce: [u8; INVITE_NONCE_LEN],
}

impl Invitation {
    /// The canonical single-line text a QR code would carry.
    pub fn to_text(&self) -> String {
        match &self.inviter {
            InviterInfo::PublicDid(did) => {
                format!("sim-invite:v1;mode=did;did={did};nonce={}", hex::encode(self.nonce))
            }
            InviterInfo::Direct { endpoint, public_key } => format!(
                "sim-invite:v1;mode=direct;endpoint={endpoint};key={};nonce={}",
                hex::encode(public_key.to_bytes_be()),
                hex::encode(self.nonce)
            ),
        }
    }

    pub fn parse(text: &str) -> Option<Invitation> {
        let rest = text.strip_prefix("sim-invite:v1;")?;
        let mut fields = BTreeMap::new();
        for part in rest.split(';') {
            let (k, v) = part.split_once('=')?;
            fields.insert(k, v);
        }
        let nonce: [u8; INVITE_NONCE_LEN] =
            hex::decode(fields.get("nonce")?).ok()?.try_into().ok()?;
        let inviter = match *fields.get("mode")? {
            "did" => InviterInfo::PublicDid(Did::parse(fields.get("did")?)?),
            "direct" => InviterInfo::Direct {
                endpoint: fields.get("endpoint")?.to_string(),
                public_key: BigUint::from_bytes_be(&hex::decode(fields.get("key")?).ok()?),
            },
            _ => return None,
        };
        Some(Invitation { inviter, nonce })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisclosureRecord {
    pub tick: Tick,
    pub request_nonce: Nonce,
    pub revealed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct PendingIssuance {
    offer: CredentialOffer,
    blinding: BigUint,
}

/// Requester-side handshake state held between initiate and complete.
#[derive(Debug, Clone)]
pub struct PendingConnection {
    pub my_peer_did: Did,
    key: KeyPair,
    request_bytes: Vec<u8>,
}

#[derive(Debug)]
pub struct InitiatedHandshake {
    pub request: SealedEnvelope,
    pub pending: PendingConnection,
    pub inviter_endpoint: String,
    /// True when the inviter's key was taken on first use without an
    /// attestation check; callers trace a warning.
    pub trust_on_first_use: bool,
}

#[derive(Debug)]
pub struct AcceptedHandshake {
    pub response: SealedEnvelope,
    pub requester_endpoint: String,
    pub their_peer_did: Did,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wallet {
    pub owner: String,
    pub profile: GroupProfile,
    pub mailbox_address: String,
    keys: BTreeMap<String, KeyPair>,
    next_key: u64,
    link_secret: BigUint,
    pub public_dids: Vec<(Did, String)>,
    pub peer_dids: Vec<(Did, String)>,
    pub credentials: Vec<HeldCredential>,
    pending_issuance: BTreeMap<Nonce, PendingIssuance>,
    pub connections: BTreeMap<String, Connection>,
    issued_invitations: BTreeMap<[u8; INVITE_NONCE_LEN], String>,
    pub disclosures: Vec<DisclosureRecord>,
    pub trusted_attesters: Vec<Did>,
}

impl Wallet {
    /// Provision a wallet. The link secret is created here, exactly once;
    /// every credential this wallet ever requests blinds the same secret.
    pub fn new<R: RngCore>(owner: &str, profile: GroupProfile, rng: &mut R) -> Self {
        let group = profile.params();
        let link_secret = group.rand_nonzero_scalar(rng);
        let mut addr = [0u8; 6];
        rng.fill_bytes(&mut addr);
        Wallet {
            owner: owner.to_string(),
            profile,
            mailbox_address: format!("mb-{}", hex::encode(addr)),
            keys: BTreeMap::new(),
            next_key: 0,
            link_secret,
            public_dids: Vec::new(),
            peer_dids: Vec::new(),
            credentials: Vec::new(),
            pending_issuance: BTreeMap::new(),
            connections: BTreeMap::new(),
            issued_invitations: BTreeMap::new(),
            disclosures: Vec::new(),
            trusted_attesters: Vec::new(),
        }
    }

    pub fn group(&self) -> &'static GroupParams {
        self.profile.params()
    }

    pub fn link_secret(&self) -> &BigUint {
        &self.link_secret
    }

    pub fn new_key<R: RngCore>(&mut self, rng: &mut R) -> String {
        let key_id = format!("key-{}", self.next_key);
        self.next_key += 1;
        let kp = crate::crypto::keygen(self.group(), rng);
        self.keys.insert(key_id.clone(), kp);
        key_id
    }

    pub fn key(&self, key_id: &str) -> Option<&KeyPair> {
        self.keys.get(key_id)
    }

    /// Fresh pairwise DID plus keypair, stored only in this wallet. No
    /// ledger is touched.
    pub fn create_peer_did<R: RngCore>(&mut self, rng: &mut R) -> Did {
        let key_id = self.new_key(rng);
        let did = Did::peer_from_key(&self.keys[&key_id].pk);
        self.peer_dids.push((did.clone(), key_id));
        did
    }

    /// Register a public DID document on the given ledger; the DID is
    /// derived from the fresh key, and the document advertises this
    /// wallet's mailbox as its service endpoint.
    pub fn create_public_did<R: RngCore>(
        &mut self,
        ledger: &mut Ledger,
        now: Tick,
        rng: &mut R,
    ) -> Result<Did, LedgerError> {
        let key_id = self.new_key(rng);
        let kp = self.keys[&key_id].clone();
        let did = Did::public_from_key(&ledger.ledger_id, &kp.pk);
        let doc = DidDocument {
            did: did.clone(),
            verification_keys: vec![VerificationKey {
                key_id: key_id.clone(),
                public_key: kp.pk.clone(),
            }],
            service_endpoints: vec![ServiceEndpoint {
                label: "kyc".into(),
                address: self.mailbox_address.clone(),
            }],
            attestations: vec![],
        };
        let payload = doc.encode();
        let msg = LedgerTransaction::signing_bytes(TxKind::DidDocRegistration, &payload, &did);
        let tx = LedgerTransaction {
            kind: TxKind::DidDocRegistration,
            payload,
            author_did: did.clone(),
            author_signature: sign(self.group(), &kp.sk, &msg),
        };
        ledger.append(self.group(), tx, now)?;
        self.public_dids.push((did.clone(), key_id));
        Ok(did)
    }

    /// Re-register an existing public DID's document, e.g. to attach an
    /// attestation or advertise a rotated key.
    pub fn republish_document(
        &self,
        ledger: &mut Ledger,
        doc: &DidDocument,
        now: Tick,
    ) -> Result<(), LedgerError> {
        let (_, key_id) = self
            .public_dids
            .iter()
            .find(|(d, _)| d == &doc.did)
            .expect("document for a did this wallet controls");
        let kp = &self.keys[key_id];
        let payload = doc.encode();
        let msg = LedgerTransaction::signing_bytes(TxKind::DidDocRegistration, &payload, &doc.did);
        let tx = LedgerTransaction {
            kind: TxKind::DidDocRegistration,
            payload,
            author_did: doc.did.clone(),
            author_signature: sign(self.group(), &kp.sk, &msg),
        };
        ledger.append(self.group(), tx, now)?;
        Ok(())
    }

    /// Hand out an invitation. With a public DID the invitee resolves the
    /// rest; otherwise the invitation itself carries endpoint and key.
    pub fn create_invitation<R: RngCore>(
        &mut self,
        public_did: Option<&Did>,
        rng: &mut R,
    ) -> Invitation {
        let mut nonce = [0u8; INVITE_NONCE_LEN];
        rng.fill_bytes(&mut nonce);
        match public_did {
            Some(did) => {
                let (_, key_id) = self
                    .public_dids
                    .iter()
                    .find(|(d, _)| d == did)
                    .expect("inviter controls this did");
                self.issued_invitations.insert(nonce, key_id.clone());
                Invitation {
                    inviter: InviterInfo::PublicDid(did.clone()),
                    nonce,
                }
            }
            None => {
                let key_id = self.new_key(rng);
                let pk = self.keys[&key_id].pk.clone();
                self.issued_invitations.insert(nonce, key_id);
                Invitation {
                    inviter: InviterInfo::Direct {
                        endpoint: self.mailbox_address.clone(),
                        public_key: pk,
                    },
                    nonce,
                }
            }
        }
    }

    /// Invitee side, step 1: resolve the inviter, create a fresh pairwise
    /// DID, and seal a connection request to the inviter's key.
    pub fn initiate_connection<R: RngCore>(
        &mut self,
        invitation: &Invitation,
        hub: &LedgerHub,
        rng: &mut R,
    ) -> Result<InitiatedHandshake, ConnectError> {
        let group = self.group();
        let (inviter_key, inviter_endpoint, mut tofu) = match &invitation.inviter {
            InviterInfo::Direct { endpoint, public_key } => {
                (public_key.clone(), endpoint.clone(), true)
            }
            InviterInfo::PublicDid(did) => {
                let doc = hub
                    .resolve(did)
                    .map_err(|e| ConnectError::ResolutionFailed(e.to_string()))?;
                let key = doc
                    .verification_keys
                    .first()
                    .ok_or_else(|| ConnectError::ResolutionFailed("document has no keys".into()))?;
                let endpoint = doc
                    .endpoint("kyc")
                    .ok_or_else(|| {
                        ConnectError::ResolutionFailed("no kyc service endpoint".into())
                    })?
                    .address
                    .clone();
                (key.public_key.clone(), endpoint, false)
            }
        };

        // attestation policy: with trusted attesters configured, the
        // inviter's key must carry a valid attestation from one of them;
        // without any, fall back to trust-on-first-use
        if let InviterInfo::PublicDid(did) = &invitation.inviter {
            if self.trusted_attesters.is_empty() {
                tofu = true;
            } else {
                let doc = hub
                    .resolve(did)
                    .map_err(|e| ConnectError::ResolutionFailed(e.to_string()))?;
                let attested = doc.attestations.iter().any(|a| {
                    if !self.trusted_attesters.contains(&a.attester) {
                        return false;
                    }
                    let Some(key) = doc.key(&a.key_id) else {
                        return false;
                    };
                    if key.public_key != inviter_key {
                        return false;
                    }
                    let Ok(attester_doc) = hub.resolve(&a.attester) else {
                        return false;
                    };
                    let msg = attestation_message(did, &a.key_id, &key.public_key);
                    attester_doc
                        .verification_keys
                        .iter()
                        .any(|k| verify(group, &k.public_key, &msg, &a.signature))
                });
                if !attested {
                    return Err(ConnectError::AttestationInvalid(format!(
                        "no trusted attestation on {did}"
                    )));
                }
            }
        }

        let my_peer_did = self.create_peer_did(rng);
        let (_, key_id) = self.peer_dids.last().expect("just created");
        let key = self.keys[key_id].clone();
        let request = ConnectionRequest {
            requester_peer_did: my_peer_did.clone(),
            requester_public_key: key.pk.clone(),
            requester_endpoint: self.mailbox_address.clone(),
            invitation_nonce: invitation.nonce,
        };
        let request_bytes = request.encode();
        let sealed = seal_to(group, &inviter_key, &request_bytes, rng);
        Ok(InitiatedHandshake {
            request: sealed,
            pending: PendingConnection {
                my_peer_did,
                key,
                request_bytes,
            },
            inviter_endpoint,
            trust_on_first_use: tofu,
        })
    }

    /// Inviter side, step 2: open the sealed request, create the pairwise
    /// DID for this relationship, derive the channel key, and seal a
    /// response back to the requester.
    pub fn accept_connection<R: RngCore>(
        &mut self,
        sealed: &SealedEnvelope,
        rng: &mut R,
    ) -> Result<AcceptedHandshake, ConnectError> {
        let group = self.group();
        let request_bytes = self
            .issued_invitations
            .values()
            .cloned()
            .collect::<BTreeSet<_>>()
            .iter()
            .find_map(|key_id| open_sealed(group, &self.keys[key_id], sealed))
            .ok_or(ConnectError::HandshakeMismatch)?;
        let request = ConnectionRequest::decode(&request_bytes)
            .map_err(|_| ConnectError::HandshakeMismatch)?;
        if !self.issued_invitations.contains_key(&request.invitation_nonce) {
            return Err(ConnectError::HandshakeMismatch);
        }

        let my_peer_did = self.create_peer_did(rng);
        let (_, key_id) = self.peer_dids.last().expect("just created");
        let key = self.keys[key_id].clone();
        let shared = super::channel::derive_channel_key(
            group,
            &key.sk,
            &request.requester_public_key,
            &my_peer_did,
            &request.requester_peer_did,
        );
        let tag = confirm_tag(&shared, &request_bytes, &my_peer_did, &key.pk);
        let response = ConnectionResponse {
            responder_peer_did: my_peer_did.clone(),
            responder_public_key: key.pk.clone(),
            responder_endpoint: self.mailbox_address.clone(),
            confirm_tag: tag,
        };
        let sealed_response = seal_to(group, &request.requester_public_key, &response.encode(), rng);
        let conn = Connection {
            my_peer_did,
            their_peer_did: request.requester_peer_did.clone(),
            my_key: key,
            their_public_key: request.requester_public_key.clone(),
            their_endpoint: request.requester_endpoint.clone(),
            shared_key: shared,
            send_seq: 0,
            recv_seq: 0,
            update_push: false,
        };
        let their = conn.their_peer_did.to_string();
        self.connections.insert(their, conn);
        Ok(AcceptedHandshake {
            response: sealed_response,
            requester_endpoint: request.requester_endpoint,
            their_peer_did: request.requester_peer_did,
        })
    }

    /// Invitee side, step 3: open the sealed response, derive the channel
    /// key, and verify the responder's confirmation tag.
    pub fn complete_connection(
        &mut self,
        pending: PendingConnection,
        sealed: &SealedEnvelope,
    ) -> Result<Did, ConnectError> {
        let group = self.group();
        let response_bytes =
            open_sealed(group, &pending.key, sealed).ok_or(ConnectError::HandshakeMismatch)?;
        let response = ConnectionResponse::decode(&response_bytes)
            .map_err(|_| ConnectError::HandshakeMismatch)?;
        let shared = super::channel::derive_channel_key(
            group,
            &pending.key.sk,
            &response.responder_public_key,
            &pending.my_peer_did,
            &response.responder_peer_did,
        );
        let expected = confirm_tag(
            &shared,
            &pending.request_bytes,
            &response.responder_peer_did,
            &response.responder_public_key,
        );
        if expected != response.confirm_tag {
            return Err(ConnectError::HandshakeMismatch);
        }
        let conn = Connection {
            my_peer_did: pending.my_peer_did,
            their_peer_did: response.responder_peer_did.clone(),
            my_key: pending.key,
            their_public_key: response.responder_public_key,
            their_endpoint: response.responder_endpoint,
            shared_key: shared,
            send_seq: 0,
            recv_seq: 0,
            update_push: false,
        };
        self.connections
            .insert(response.responder_peer_did.to_string(), conn);
        Ok(response.responder_peer_did)
    }

    pub fn connection_mut(&mut self, their_peer_did: &Did) -> Option<&mut Connection> {
        self.connections.get_mut(&their_peer_did.to_string())
    }

    pub fn note_pending_issuance(&mut self, offer: CredentialOffer, blinding: BigUint) {
        self.pending_issuance
            .insert(offer.nonce, PendingIssuance { offer, blinding });
    }

    pub fn take_pending_issuance(&mut self, offer_nonce: &Nonce) -> Option<(CredentialOffer, BigUint)> {
        self.pending_issuance
            .remove(offer_nonce)
            .map(|p| (p.offer, p.blinding))
    }

    pub fn record_disclosure(&mut self, tick: Tick, request_nonce: Nonce, revealed: Vec<String>) {
        self.disclosures.push(DisclosureRecord {
            tick,
            request_nonce,
            revealed,
        });
    }

    // ---- canonical serialization (used by encrypted backups) ----

    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.wallet.v1");
        e.field("owner").put_str(&self.owner);
        e.field("profile").put_str(self.profile.name());
        e.field("mailbox").put_str(&self.mailbox_address);
        e.field("keys").put_count(self.keys.len());
        for (id, kp) in &self.keys {
            e.put_str(id);
            e.put_int(&kp.sk);
            e.put_int(&kp.pk);
        }
        e.field("next_key").put_u64(self.next_key);
        e.field("link_secret").put_int(&self.link_secret);
        e.field("public_dids").put_count(self.public_dids.len());
        for (did, key_id) in &self.public_dids {
            e.put_str(&did.to_string());
            e.put_str(key_id);
        }
        e.field("peer_dids").put_count(self.peer_dids.len());
        for (did, key_id) in &self.peer_dids {
            e.put_str(&did.to_string());
            e.put_str(key_id);
        }
        e.field("credentials").put_count(self.credentials.len());
        for c in &self.credentials {
            e.put_bytes(&c.encode());
        }
        e.field("pending").put_count(self.pending_issuance.len());
        for (nonce, p) in &self.pending_issuance {
            e.put_bytes(nonce);
            e.put_bytes(&p.offer.encode());
            e.put_int(&p.blinding);
        }
        e.field("connections").put_count(self.connections.len());
        for (their, c) in &self.connections {
            e.put_str(their);
            e.put_str(&c.my_peer_did.to_string());
            e.put_str(&c.their_peer_did.to_string());
            e.put_int(&c.my_key.sk);
            e.put_int(&c.my_key.pk);
            e.put_int(&c.their_public_key);
            e.put_str(&c.their_endpoint);
            e.put_bytes(&c.shared_key);
            e.put_u64(c.send_seq);
            e.put_u64(c.recv_seq);
            e.put_bool(c.update_push);
        }
        e.field("invitations").put_count(self.issued_invitations.len());
        for (nonce, key_id) in &self.issued_invitations {
            e.put_bytes(nonce);
            e.put_str(key_id);
        }
        e.field("disclosures").put_count(self.disclosures.len());
        for d in &self.disclosures {
            e.put_u64(d.tick);
            e.put_bytes(&d.request_nonce);
            e.put_count(d.revealed.len());
            for name in &d.revealed {
                e.put_str(name);
            }
        }
        e.field("attesters").put_count(self.trusted_attesters.len());
        for a in &self.trusted_attesters {
            e.put_str(&a.to_string());
        }
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let bad = |m: &str| DecodeError::Invalid(m.into());
        let mut d = Dec::new(bytes);
        d.field("sim.wallet.v1")?;
        d.field("owner")?;
        let owner = d.str()?.to_string();
        d.field("profile")?;
        let profile = match d.str()? {
            "TEST" => GroupProfile::Test,
            "DEFAULT" => GroupProfile::Default,
            _ => return Err(bad("unknown profile")),
        };
        d.field("mailbox")?;
        let mailbox_address = d.str()?.to_string();
        d.field("keys")?;
        let n = d.count()?;
        let mut keys = BTreeMap::new();
        for _ in 0..n {
            let id = d.str()?.to_string();
            let sk = d.int()?;
            let pk = d.int()?;
            keys.insert(id, KeyPair { sk, pk });
        }
        d.field("next_key")?;
        let next_key = d.u64()?;
        d.field("link_secret")?;
        let link_secret = d.int()?;
        d.field("public_dids")?;
        let n = d.count()?;
        let mut public_dids = Vec::with_capacity(n);
        for _ in 0..n {
            let did = Did::parse(d.str()?).ok_or_else(|| bad("bad did"))?;
            public_dids.push((did, d.str()?.to_string()));
        }
        d.field("peer_dids")?;
        let n = d.count()?;
        let mut peer_dids = Vec::with_capacity(n);
        for _ in 0..n {
            let did = Did::parse(d.str()?).ok_or_else(|| bad("bad did"))?;
            peer_dids.push((did, d.str()?.to_string()));
        }
        d.field("credentials")?;
        let n = d.count()?;
        let mut credentials = Vec::with_capacity(n);
        for _ in 0..n {
            credentials.push(HeldCredential::decode(d.bytes()?)?);
        }
        d.field("pending")?;
        let n = d.count()?;
        let mut pending_issuance = BTreeMap::new();
        for _ in 0..n {
            let nonce: Nonce = d.fixed()?;
            let offer = CredentialOffer::decode(d.bytes()?)?;
            let blinding = d.int()?;
            pending_issuance.insert(nonce, PendingIssuance { offer, blinding });
        }
        d.field("connections")?;
        let n = d.count()?;
        let mut connections = BTreeMap::new();
        for _ in 0..n {
            let their = d.str()?.to_string();
            let my_peer_did = Did::parse(d.str()?).ok_or_else(|| bad("bad did"))?;
            let their_peer_did = Did::parse(d.str()?).ok_or_else(|| bad("bad did"))?;
            let my_key = KeyPair {
                sk: d.int()?,
                pk: d.int()?,
            };
            let their_public_key = d.int()?;
            let their_endpoint = d.str()?.to_string();
            let shared_key = d.fixed()?;
            let send_seq = d.u64()?;
            let recv_seq = d.u64()?;
            let update_push = d.bool()?;
            connections.insert(
                their,
                Connection {
                    my_peer_did,
                    their_peer_did,
                    my_key,
                    their_public_key,
                    their_endpoint,
                    shared_key,
                    send_seq,
                    recv_seq,
                    update_push,
                },
            );
        }
        d.field("invitations")?;
        let n = d.count()?;
        let mut issued_invitations = BTreeMap::new();
        for _ in 0..n {
            let nonce: [u8; INVITE_NONCE_LEN] = d.fixed()?;
            issued_invitations.insert(nonce, d.str()?.to_string());
        }
        d.field("disclosures")?;
        let n = d.count()?;
        let mut disclosures = Vec::with_capacity(n);
        for _ in 0..n {
            let tick = d.u64()?;
            let request_nonce: Nonce = d.fixed()?;
            let m = d.count()?;
            let mut revealed = Vec::with_capacity(m);
            for _ in 0..m {
                revealed.push(d.str()?.to_string());
            }
            disclosures.push(DisclosureRecord {
                tick,
                request_nonce,
                revealed,
            });
        }
        d.field("attesters")?;
        let n = d.count()?;
        let mut trusted_attesters = Vec::with_capacity(n);
        for _ in 0..n {
            trusted_attesters.push(Did::parse(d.str()?).ok_or_else(|| bad("bad did"))?);
        }
        d.finish()?;
        Ok(Wallet {
            owner,
            profile,
            mailbox_address,
            keys,
            next_key,
            link_secret,
            public_dids,
            peer_dids,
            credentials,
            pending_issuance,
            connections,
            issued_invitations,
            disclosures,
            trusted_attesters,
        })
    }
}

/// Run the whole handshake with direct delivery; returns the pairwise DIDs
/// each side recorded for the other.
pub fn connect_pair<R: RngCore>(
    inviter: &mut Wallet,
    invitee: &mut Wallet,
    invitation: &Invitation,
    hub: &LedgerHub,
    rng: &mut R,
) -> Result<(Did, Did), ConnectError> {
    let initiated = invitee.initiate_connection(invitation, hub, rng)?;
    let accepted = inviter.accept_connection(&initiated.request, rng)?;
    let inviter_peer_did = invitee.complete_connection(initiated.pending, &accepted.response)?;
    Ok((accepted.their_peer_did, inviter_peer_did))
}
