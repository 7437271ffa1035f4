//! The service example runs to completion.

#[allow(dead_code)]
mod serve_in_process {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/serve_in_process.rs"));
}

#[test]
fn serve_in_process_runs() {
    serve_in_process::run_example().unwrap();
}
