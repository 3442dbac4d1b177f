//! Pretty-printer for canonical object files. Each decoder is tried in
//! turn; the first that parses cleanly wins.

use sim_core::anoncred::credential::{CredentialOffer, VerifiableCredential};
use sim_core::anoncred::objects::{CredentialDefinition, Schema};
use sim_core::anoncred::present::{ProofRequest, VerifiablePresentation};
use std::fmt::Write;

pub fn render(bytes: &[u8]) -> Option<String> {
    if let Ok(vp) = VerifiablePresentation::decode(bytes) {
        return Some(render_vp(&vp));
    }
    if let Ok(schema) = Schema::decode(bytes) {
        let mut out = String::new();
        writeln!(out, "schema       {}", schema.schema_id).ok()?;
        writeln!(out, "name/version {} {}", schema.name, schema.version).ok()?;
        writeln!(out, "attributes   {}", schema.attr_names.join(", ")).ok()?;
        return Some(out);
    }
    if let Ok(cd) = CredentialDefinition::decode(bytes) {
        let mut out = String::new();
        writeln!(out, "cred def     {}", cd.cred_def_id).ok()?;
        writeln!(out, "schema       {}", cd.schema_id).ok()?;
        writeln!(out, "issuer       {} (key {})", cd.issuer_did, cd.key_id).ok()?;
        writeln!(
            out,
            "revocation   {}",
            cd.registry_id.as_deref().unwrap_or("unsupported")
        )
        .ok()?;
        return Some(out);
    }
    if let Ok(offer) = CredentialOffer::decode(bytes) {
        let mut out = String::new();
        writeln!(out, "offer for    {}", offer.cred_def_id).ok()?;
        writeln!(out, "expiration   {}", offer.expiration).ok()?;
        writeln!(out, "nonce        {}", hex::encode(offer.nonce)).ok()?;
        for (k, v) in &offer.preview {
            writeln!(out, "preview      {k} = {v}").ok()?;
        }
        return Some(out);
    }
    if let Ok(req) = ProofRequest::decode(bytes) {
        let mut out = String::new();
        writeln!(out, "proof request (nonce {})", hex::encode(req.nonce)).ok()?;
        writeln!(
            out,
            "created {} / window {}",
            req.created_at, req.freshness_window
        )
        .ok()?;
        if let Some(nr) = req.non_revocation {
            writeln!(out, "non-revocation as of {}", nr.as_of).ok()?;
        }
        for item in &req.requested {
            writeln!(
                out,
                "attr {} (schemas: {}; cred defs: {})",
                item.name,
                or_any(&item.restrictions.schema_ids),
                or_any(&item.restrictions.cred_def_ids),
            )
            .ok()?;
        }
        return Some(out);
    }
    if let Ok(vc) = VerifiableCredential::decode(bytes) {
        let mut out = String::new();
        writeln!(out, "credential   {}", vc.cred_def_id).ok()?;
        writeln!(out, "schema       {}", vc.schema_id).ok()?;
        writeln!(out, "commitments  {}", vc.attribute_commitments.len()).ok()?;
        writeln!(out, "expiration   {}", vc.expiration).ok()?;
        if let Some(rev) = &vc.revocation {
            writeln!(out, "revocation   {} index {}", rev.registry_id, rev.index).ok()?;
        }
        return Some(out);
    }
    None
}

fn or_any(items: &[String]) -> String {
    if items.is_empty() {
        "any".into()
    } else {
        items.join(",")
    }
}

fn render_vp(vp: &VerifiablePresentation) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "presentation (request nonce {})", hex::encode(vp.request_nonce));
    let _ = writeln!(
        w,
        "credentials {} / equality proofs {}",
        vp.credentials.len(),
        vp.equality_proofs.len()
    );
    for (i, cred) in vp.credentials.iter().enumerate() {
        let _ = writeln!(w, "[{i}] {}", cred.cred_def_id);
        let _ = writeln!(w, "    schema      {}", cred.schema_id);
        let _ = writeln!(w, "    expiration  {}", cred.expiration);
        if let Some(rev) = &cred.revocation {
            let _ = writeln!(
                w,
                "    revocation  {} index {} version_claimed {:?}",
                rev.registry_id, rev.index, cred.revocation_version_claimed
            );
        }
        let _ = writeln!(w, "    commitments {}", cred.attribute_commitments.len());
        for attr in &cred.revealed {
            let _ = writeln!(w, "    revealed    {} = {}", attr.name, attr.value);
        }
        let hidden = cred.attribute_commitments.len() - cred.revealed.len();
        if hidden > 0 {
            let _ = writeln!(w, "    hidden      {hidden} attribute(s)");
        }
    }
    out
}
