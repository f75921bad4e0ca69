//! Bipartite user/slot contention graph and the interference-cancellation
//! (peeling) decoder that runs on it.
//!
//! A slot whose residual set holds exactly one user is a singleton: the base
//! station decodes that user's packet, learns where its other replicas are,
//! and subtracts them from every stored slot. Each subtraction can create new
//! singletons. Erased slots take part in the subtraction bookkeeping but never
//! yield a decoded packet.

use std::collections::VecDeque;
use std::io::{self, Write};

use crate::access::KeyedSchedule;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SlotNode {
    index: u64,
    participants: Vec<u32>,
    residual: Vec<u32>,
    erased: bool,
}

impl SlotNode {
    /// 1-based slot index `j`.
    pub fn index(&self) -> u64 {
        self.index
    }

    /// Users that transmitted in this slot, ascending.
    pub fn participants(&self) -> &[u32] {
        &self.participants
    }

    /// Participants whose replica has not been cancelled yet (unordered).
    pub fn residual(&self) -> &[u32] {
        &self.residual
    }

    pub fn degree(&self) -> usize {
        self.participants.len()
    }

    pub fn residual_degree(&self) -> usize {
        self.residual.len()
    }

    pub fn is_erased(&self) -> bool {
        self.erased
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UserState {
    /// Index of the slot this user was decoded from, if decoded.
    pub resolved_in: Option<u64>,
    /// `|u_i|`: replicas transmitted so far.
    pub replicas: u32,
}

impl UserState {
    pub fn is_resolved(&self) -> bool {
        self.resolved_in.is_some()
    }
}

/// How a decoded user's replicas are located.
#[derive(Debug, Clone)]
enum ReplicaLookup {
    /// Re-evaluate the keyed schedule for every stored slot.
    Keyed(KeyedSchedule),
    /// Search the stored participant lists (hand-built graphs).
    Scan,
}

#[derive(Debug, Clone)]
pub struct ContentionGraph {
    n_users: u32,
    slots: Vec<SlotNode>,
    users: Vec<UserState>,
    resolved_count: usize,
    edges: u64,
    lookup: ReplicaLookup,
    /// Non-erased slots whose residual degree reached one, not yet processed.
    queue: VecDeque<usize>,
}

impl ContentionGraph {
    /// A graph whose slots are supplied explicitly by the caller.
    pub fn new(n_users: u32) -> Self {
        Self::with_lookup(n_users, ReplicaLookup::Scan)
    }

    /// A graph driven by a keyed schedule. Slots added to it must carry the
    /// participants the schedule assigns to them, because decoded users'
    /// replicas are found by re-evaluating the schedule.
    pub fn with_schedule(schedule: KeyedSchedule) -> Self {
        let n = schedule.n_users();
        Self::with_lookup(n, ReplicaLookup::Keyed(schedule))
    }

    fn with_lookup(n_users: u32, lookup: ReplicaLookup) -> Self {
        ContentionGraph {
            n_users,
            slots: Vec::new(),
            users: vec![UserState::default(); n_users as usize],
            resolved_count: 0,
            edges: 0,
            lookup,
            queue: VecDeque::new(),
        }
    }

    pub fn n_users(&self) -> u32 {
        self.n_users
    }

    pub fn slots(&self) -> &[SlotNode] {
        &self.slots
    }

    pub fn slot_count(&self) -> u64 {
        self.slots.len() as u64
    }

    pub fn users(&self) -> &[UserState] {
        &self.users
    }

    pub fn is_resolved(&self, user: u32) -> bool {
        self.users[user as usize].is_resolved()
    }

    /// `N_R`.
    pub fn resolved_count(&self) -> usize {
        self.resolved_count
    }

    /// Total number of edges, equal to the sum of replica counts.
    pub fn edge_count(&self) -> u64 {
        self.edges
    }

    pub fn resolved_users(&self) -> Vec<u32> {
        (0..self.n_users).filter(|&u| self.is_resolved(u)).collect()
    }

    /// Appends slot `j = slot_count() + 1`. Replicas of already decoded users
    /// are cancelled on arrival. Duplicate ids are collapsed.
    pub fn add_slot(&mut self, participants: &[u32], erased: bool) -> Result<u64> {
        if let Some(&bad) = participants.iter().find(|&&u| u >= self.n_users) {
            return Err(Error::Structural(format!(
                "user id {bad} out of range for {} users",
                self.n_users
            )));
        }
        let mut participants = participants.to_vec();
        participants.sort_unstable();
        participants.dedup();

        let residual: Vec<u32> = participants
            .iter()
            .copied()
            .filter(|&u| !self.users[u as usize].is_resolved())
            .collect();
        for &u in &participants {
            self.users[u as usize].replicas += 1;
        }
        self.edges += participants.len() as u64;

        let index = self.slots.len() as u64 + 1;
        if residual.len() == 1 && !erased {
            self.queue.push_back(self.slots.len());
        }
        self.slots.push(SlotNode {
            index,
            participants,
            residual,
            erased,
        });
        Ok(index)
    }

    /// Runs cancellation to completion; returns the number of users decoded.
    pub fn peel(&mut self) -> usize {
        self.peel_stepwise().sum()
    }

    /// One cycle per item: every singleton available at the start of the cycle
    /// is decoded, and the singletons this creates form the next cycle.
    pub fn peel_stepwise(&mut self) -> PeelCycles<'_> {
        PeelCycles { graph: self }
    }

    /// Runs one cycle; `None` once no singleton is left.
    pub fn peel_cycle(&mut self) -> Option<usize> {
        while !self.queue.is_empty() {
            let batch: Vec<usize> = self.queue.drain(..).collect();
            let mut decoded = 0;
            for pos in batch {
                if let [user] = self.slots[pos].residual[..] {
                    self.resolve(user, pos);
                    decoded += 1;
                }
            }
            if decoded > 0 {
                return Some(decoded);
            }
        }
        None
    }

    /// Peels one singleton at a time, letting `choose` pick which of the
    /// pending singleton slots (by position) to process next.
    pub fn peel_with<F>(&mut self, mut choose: F) -> usize
    where
        F: FnMut(&[usize]) -> usize,
    {
        let mut pending: Vec<usize> = self.queue.drain(..).collect();
        let mut decoded = 0;
        loop {
            pending.retain(|&pos| self.slots[pos].residual.len() == 1);
            if pending.is_empty() {
                return decoded;
            }
            let k = choose(&pending).min(pending.len() - 1);
            let pos = pending.swap_remove(k);
            let user = self.slots[pos].residual[0];
            self.resolve(user, pos);
            decoded += 1;
            pending.extend(self.queue.drain(..));
        }
    }

    fn resolve(&mut self, user: u32, from: usize) {
        let state = &mut self.users[user as usize];
        debug_assert!(!state.is_resolved());
        state.resolved_in = Some(self.slots[from].index);
        self.resolved_count += 1;

        for (pos, slot) in self.slots.iter_mut().enumerate() {
            let present = match &self.lookup {
                ReplicaLookup::Keyed(schedule) => schedule.transmits(user, slot.index),
                ReplicaLookup::Scan => slot.participants.binary_search(&user).is_ok(),
            };
            if !present {
                continue;
            }
            if let Some(k) = slot.residual.iter().position(|&v| v == user) {
                slot.residual.swap_remove(k);
                if slot.residual.len() == 1 && !slot.erased {
                    self.queue.push_back(pos);
                }
            }
        }
    }

    /// Writes one `user_id slot_index` line per edge, slot-major.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        for slot in &self.slots {
            for &u in &slot.participants {
                writeln!(out, "{u} {}", slot.index)?;
            }
        }
        Ok(())
    }
}

pub struct PeelCycles<'a> {
    graph: &'a mut ContentionGraph,
}

impl PeelCycles<'_> {
    pub fn graph(&self) -> &ContentionGraph {
        self.graph
    }
}

impl Iterator for PeelCycles<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        self.graph.peel_cycle()
    }
}
