//! Successive interference cancellation on a hand-built contention graph.
//!
//! Three users, four slots. Slot 4 holds a lone user, which starts a chain of
//! cancellations that eventually frees everyone.

use frameless::ContentionGraph;

fn main() -> frameless::Result<()> {
    let mut graph = ContentionGraph::new(3);
    for slot in [&[0, 1][..], &[0, 2], &[0, 2], &[1]] {
        graph.add_slot(slot, false)?;
    }

    let mut cycle = 0;
    let mut steps = graph.peel_stepwise();
    while let Some(n) = steps.next() {
        cycle += 1;
        println!("cycle {cycle}: {n} user(s) decoded, resolved so far {:?}", steps.graph().resolved_users());
    }

    for (u, state) in graph.users().iter().enumerate() {
        println!("user {u}: {} replicas, decoded from slot {:?}", state.replicas, state.resolved_in);
    }

    println!("\nedge list (user slot):");
    graph.write_edge_list(std::io::stdout())?;

    // Two users that always collide form a stopping set.
    let mut stuck = ContentionGraph::new(2);
    stuck.add_slot(&[0, 1], false)?;
    stuck.add_slot(&[0, 1], false)?;
    println!("\nstopping set: {} of 2 decoded", stuck.peel());
    Ok(())
}
