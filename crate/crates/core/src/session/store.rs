// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use uuid::Uuid;

use crate::error::{Error, Result};

use super::Session;

pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(30 * 60);

struct Entry {
    session: Arc<Mutex<Session>>,
    last_seen: Instant,
}

/// Live sessions, each behind its own lock so that operations on one
/// session are serialized while different sessions proceed independently.
/// Sessions idle for longer than the TTL are dropped.
pub struct SessionStore {
    entries: Mutex<HashMap<Uuid, Entry>>,
    ttl: Duration,
}

impl SessionStore {
    pub fn new(ttl: Duration) -> Self {
        Self { entries: Mutex::new(HashMap::new()), ttl }
    }

    pub fn create(&self) -> Uuid {
        let session = Session::new();
        let id = session.id();
        let mut entries = self.entries.lock().unwrap();
        Self::purge_locked(&mut entries, self.ttl, Instant::now());
        entries.insert(id, Entry { session: Arc::new(Mutex::new(session)), last_seen: Instant::now() });
        id
    }

    /// Looks up a session and marks it used.
    pub fn get(&self, id: Uuid) -> Result<Arc<Mutex<Session>>> {
        let now = Instant::now();
        let mut entries = self.entries.lock().unwrap();
        Self::purge_locked(&mut entries, self.ttl, now);
        let entry = entries.get_mut(&id).ok_or(Error::SessionNotFound(id))?;
        entry.last_seen = now;
        Ok(entry.session.clone())
    }

    pub fn remove(&self, id: Uuid) -> bool {
        self.entries.lock().unwrap().remove(&id).is_some()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops expired sessions; returns how many.
    pub fn purge_expired(&self) -> usize {
        Self::purge_locked(&mut self.entries.lock().unwrap(), self.ttl, Instant::now())
    }

    fn purge_locked(entries: &mut HashMap<Uuid, Entry>, ttl: Duration, now: Instant) -> usize {
        let before = entries.len();
        entries.retain(|_, e| now.duration_since(e.last_seen) <= ttl);
        before - entries.len()
    }
}

impl Default for SessionStore {
    fn default() -> Self {
        Self::new(DEFAULT_SESSION_TTL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn create_get_remove() {
        let store = SessionStore::default();
        let id = store.create();
        assert_eq!(store.get(id).unwrap().lock().unwrap().id(), id);
        assert!(matches!(store.get(Uuid::new_v4()), Err(Error::SessionNotFound(_))));
        assert!(store.remove(id));
        assert!(store.is_empty());
    }

    #[test]
    fn idle_sessions_expire() {
        let store = SessionStore::new(Duration::from_millis(20));
        let id = store.create();
        std::thread::sleep(Duration::from_millis(40));
        assert!(matches!(store.get(id), Err(Error::SessionNotFound(_))));
        assert_eq!(store.len(), 0);
    }

    #[test]
    fn use_refreshes_expiry() {
        let store = SessionStore::new(Duration::from_millis(150));
        let id = store.create();
        for _ in 0..4 {
            std::thread::sleep(Duration::from_millis(60));
            store.get(id).unwrap();
        }
    }
}
