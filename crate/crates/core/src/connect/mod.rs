//! DIDs and DID documents, the DID-exchange connection protocol,
//! authenticated-encrypted channels, edge wallets, cloud mailboxes, and
//! encrypted wallet backup/restore.

pub mod backup;
pub mod channel;
pub mod did;
pub mod mailbox;
pub mod wallet;
