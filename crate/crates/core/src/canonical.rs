//! Canonical JSON encoding (sorted keys, no whitespace) and SHA-256 digests.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Serializes through `serde_json::Value`, whose maps are ordered by key.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("domain types serialize to JSON");
    serde_json::to_string(&value).expect("JSON values always serialize")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn keys_are_sorted_and_compact() {
        let mut m = HashMap::new();
        m.insert("zeta", 1);
        m.insert("alpha", 2);
        assert_eq!(to_canonical_json(&m), r#"{"alpha":2,"zeta":1}"#);
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
