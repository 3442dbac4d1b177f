//! Cloud-agent mailboxes: store-and-forward queues holding nothing but
//! ciphertext. A mailbox has no keys and cannot decrypt what it relays.

use super::channel::{Envelope, SealedEnvelope};
use std::collections::{BTreeMap, VecDeque};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MailboxItem {
    Sealed(SealedEnvelope),
    Channel(Envelope),
}

#[derive(Debug, Default)]
pub struct CloudMailbox {
    pub address: String,
    queue: VecDeque<MailboxItem>,
}

impl CloudMailbox {
    pub fn new(address: &str) -> Self {
        CloudMailbox {
            address: address.to_string(),
            queue: VecDeque::new(),
        }
    }

    pub fn deliver(&mut self, item: MailboxItem) {
        self.queue.push_back(item);
    }

    pub fn drain(&mut self) -> Vec<MailboxItem> {
        self.queue.drain(..).collect()
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    /// Inspection hook for audits (the "compromised mailbox" tests).
    pub fn peek_all(&self) -> impl Iterator<Item = &MailboxItem> {
        self.queue.iter()
    }
}

#[derive(Debug, Default)]
pub struct MailboxHub {
    boxes: BTreeMap<String, CloudMailbox>,
}

impl MailboxHub {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ensure(&mut self, address: &str) -> &mut CloudMailbox {
        self.boxes
            .entry(address.to_string())
            .or_insert_with(|| CloudMailbox::new(address))
    }

    pub fn deliver(&mut self, address: &str, item: MailboxItem) {
        self.ensure(address).deliver(item);
    }

    pub fn drain(&mut self, address: &str) -> Vec<MailboxItem> {
        self.ensure(address).drain()
    }

    /// Take the oldest queued item, if any.
    pub fn pop(&mut self, address: &str) -> Option<MailboxItem> {
        self.ensure(address).queue.pop_front()
    }

    pub fn mailboxes(&self) -> impl Iterator<Item = &CloudMailbox> {
        self.boxes.values()
    }
}
