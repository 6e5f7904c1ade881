//! Inputs shared by the criterion benches.

use evtrail::{generate, keygen, EventDescription, EvidenceConfig, KeyPair, SignatureSchemeId};

pub fn key(scheme: SignatureSchemeId) -> KeyPair {
    keygen(scheme, Some(b"bench"))
}

/// Event `i`: eight short components, all distinct across `i`.
pub fn event(i: u64) -> EventDescription {
    let components = (0..8u8)
        .map(|j| {
            let mut c = i.to_le_bytes().to_vec();
            c.push(j);
            c
        })
        .collect();
    EventDescription::new(components).expect("eight non-empty components")
}

/// `n` serialized Ed25519 records under the default configuration.
pub fn records(n: u64) -> Vec<Vec<u8>> {
    let kp = key(SignatureSchemeId::Ed25519);
    let cfg = EvidenceConfig::default();
    (0..n)
        .map(|i| generate(&kp, &event(i), &cfg).expect("genuine scheme").to_bytes())
        .collect()
}
