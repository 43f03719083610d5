#![no_main]

use libfuzzer_sys::fuzz_target;

// load_edge_list ingests untrusted text. It must reject bad input with a
// typed error, never panic, and anything it accepts must survive a
// serialize/reparse round trip unchanged.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(graph) = routelab::topology::load_edge_list(text) {
        let emitted = routelab::topology::emit_edge_list(&graph);
        let back = routelab::topology::load_edge_list(&emitted)
            .expect("emitted edge list must reparse");
        assert_eq!(graph.edges(), back.edges());
        assert_eq!(graph.node_count(), back.node_count());
    }
});
