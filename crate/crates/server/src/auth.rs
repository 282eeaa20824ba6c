use std::collections::HashMap;
use std::sync::Mutex;

use argon2::password_hash::rand_core::OsRng;
use argon2::password_hash::{PasswordHash, PasswordHasher, PasswordVerifier, SaltString};
use argon2::Argon2;
use chrono::{DateTime, Duration, Utc};
use rand::RngCore;

use crate::model::UserId;

pub const MIN_PASSWORD_LEN: usize = 8;

/// PHC-format argon2id hash with a fresh random salt.
pub fn hash_password(password: &str) -> String {
    let salt = SaltString::generate(&mut OsRng);
    Argon2::default()
        .hash_password(password.as_bytes(), &salt)
        .expect("argon2 with default params")
        .to_string()
}

pub fn verify_password(password: &str, hash: &str) -> bool {
    match PasswordHash::new(hash) {
        Ok(parsed) => Argon2::default()
            .verify_password(password.as_bytes(), &parsed)
            .is_ok(),
        Err(_) => false,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Session {
    pub token: String,
    pub user_id: UserId,
    pub expires_at: DateTime<Utc>,
}

/// In-memory bearer tokens. Tokens do not survive a restart.
#[derive(Debug)]
pub struct Sessions {
    ttl: Duration,
    live: Mutex<HashMap<String, Session>>,
}

impl Sessions {
    pub fn new(ttl: Duration) -> Self {
        Self {
            ttl,
            live: Mutex::new(HashMap::new()),
        }
    }

    pub fn issue(&self, user_id: UserId) -> Session {
        let mut raw = [0u8; 32];
        rand::rngs::OsRng.fill_bytes(&mut raw);
        let session = Session {
            token: hex::encode(raw),
            user_id,
            expires_at: Utc::now() + self.ttl,
        };
        let mut live = self.live.lock().expect("sessions lock");
        let now = Utc::now();
        live.retain(|_, s| s.expires_at > now);
        live.insert(session.token.clone(), session.clone());
        session
    }

    /// The user behind `token`, unless it is unknown or expired.
    pub fn user(&self, token: &str) -> Option<UserId> {
        let mut live = self.live.lock().expect("sessions lock");
        match live.get(token) {
            Some(s) if s.expires_at > Utc::now() => Some(s.user_id),
            Some(_) => {
                live.remove(token);
                None
            }
            None => None,
        }
    }
}
