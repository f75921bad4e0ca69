//! The keyed access schedule: anyone holding the beacon nonce can tell which
//! users transmit in which slot, without any shared random state.

use frameless::access::{schedule_indicator, slot_access_probability};
use frameless::{BeaconKey, KeyedSchedule};

fn main() -> frameless::Result<()> {
    let n = 20;
    let beacon = BeaconKey::from_seed(2024);
    let p_a = slot_access_probability(3.0, n as u64)?;
    let schedule = KeyedSchedule::new(beacon, p_a, n);

    println!("nonce {:#018x}, p_a = {p_a}", beacon.0);
    for slot in 1..=8 {
        println!("slot {slot}: {:?}", schedule.participants(slot));
    }

    let user = 5;
    let replicas: Vec<u64> = schedule.replica_slots(user, 40).collect();
    println!("user {user} transmits in slots {replicas:?}");
    assert!(replicas
        .iter()
        .all(|&j| schedule_indicator(user as u64, beacon, j, p_a)));
    Ok(())
}
