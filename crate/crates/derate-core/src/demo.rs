//! A self-contained demo workload: a small packet pipeline plus a random
//! traffic generator. Used by the command line `gen-demo` step and by the
//! end-to-end tests, so a full run works out of the box without external
//! design files.
//!
//! The pipeline captures a byte under a valid strobe, optionally scrambles
//! it with an LFSR, and re-emits it three stages later together with the
//! delayed strobe. A running checksum, a parity history shift register, a
//! packet counter and a handful of status flags hang off the datapath so
//! that upsets land in state with very different observability. Every cell
//! kind in the library appears at least once.

use crate::campaign::CheckerConfig;
use crate::netlist::Netlist;
use crate::rng::{next_below, stream_rng, STREAM_DEMO};
use crate::sim::Stimulus;

pub const DESIGN_NAME: &str = "pkt_pipe";

/// Width of the payload datapath in bits.
pub const PAYLOAD_WIDTH: usize = 8;

pub fn design_text() -> String {
    let mut s = String::new();
    let mut line = |l: &str| {
        s.push_str(l);
        s.push('\n');
    };

    line(&format!("module {DESIGN_NAME}"));
    line("# byte pipeline with optional LFSR scrambling, checksum and status flags");
    line("input data[0] data[1] data[2] data[3] data[4] data[5] data[6] data[7]");
    line("input data_valid mode");
    line("output pkt_out[0] pkt_out[1] pkt_out[2] pkt_out[3] pkt_out[4] pkt_out[5] pkt_out[6] pkt_out[7]");
    line("output pkt_valid status parity_out idle");

    line("wire s1d[0] s1d[1] s1d[2] s1d[3] s1d[4] s1d[5] s1d[6] s1d[7]");
    line("wire s1q[0] s1q[1] s1q[2] s1q[3] s1q[4] s1q[5] s1q[6] s1q[7]");
    line("wire v1q v2q v3q mode_s1q mode_s2q");
    line("wire lf_x1 lf_x2 lf_fb");
    line("wire lq[0] lq[1] lq[2] lq[3] lq[4] lq[5] lq[6] lq[7]");
    line("wire sc[0] sc[1] sc[2] sc[3] sc[4] sc[5] sc[6] sc[7]");
    line("wire s2d[0] s2d[1] s2d[2] s2d[3] s2d[4] s2d[5] s2d[6] s2d[7]");
    line("wire s2q[0] s2q[1] s2q[2] s2q[3] s2q[4] s2q[5] s2q[6] s2q[7]");
    line("wire s3q[0] s3q[1] s3q[2] s3q[3] s3q[4] s3q[5] s3q[6] s3q[7]");
    line("wire p01 p23 p45 p67 p0123 p4567 parity");
    line("wire phq[0] phq[1] phq[2] phq[3]");
    line("wire cd[0] cd[1] cd[2] cc0 cc1 cq[0] cq[1] cq[2]");
    line("wire cnt_max nf nz fmaxq fnfq fnzq warm pre crc_any");
    line("wire crcmix[0] crcmix[1] crcmix[2] crcmix[3] crcmix[4] crcmix[5] crcmix[6] crcmix[7]");
    line("wire crcd[0] crcd[1] crcd[2] crcd[3] crcd[4] crcd[5] crcd[6] crcd[7]");
    line("wire crcq[0] crcq[1] crcq[2] crcq[3] crcq[4] crcq[5] crcq[6] crcq[7]");
    line("wire outd[0] outd[1] outd[2] outd[3] outd[4] outd[5] outd[6] outd[7]");
    line("wire outq[0] outq[1] outq[2] outq[3] outq[4] outq[5] outq[6] outq[7]");

    line("# stage 1: capture under the valid strobe");
    for b in 0..8 {
        line(&format!("cell mx_s1[{b}] MUX2 2 s1d[{b}] data_valid s1q[{b}] data[{b}]"));
        line(&format!("dff s1[{b}] 1 s1q[{b}] s1d[{b}]"));
    }
    line("dff v1 1 v1q data_valid");
    line("dff mode_s1 1 mode_s1q mode");
    line("dff mode_s2 1 mode_s2q mode_s1q");

    line("# scrambler LFSR, xnor form so the all-zero reset state is legal");
    line("cell lf_t1 XNOR2 1 lf_x1 lq[7] lq[5]");
    line("cell lf_t2 XNOR2 1 lf_x2 lf_x1 lq[4]");
    line("cell lf_t3 XNOR2 1 lf_fb lf_x2 lq[3]");
    line("dff lfsr[0] 1 lq[0] lf_fb");
    for b in 1..8 {
        line(&format!("dff lfsr[{b}] 1 lq[{b}] lq[{}]", b - 1));
    }

    line("# stage 2: scramble when mode is set");
    for b in 0..8 {
        line(&format!("cell sc_x[{b}] XOR2 1 sc[{b}] s1q[{b}] lq[{b}]"));
        line(&format!("cell mx_s2[{b}] MUX2 2 s2d[{b}] mode_s2q s1q[{b}] sc[{b}]"));
        line(&format!("dff s2[{b}] 1 s2q[{b}] s2d[{b}]"));
    }
    line("dff v2 1 v2q v1q");

    line("# stage 3: plain pipeline delay");
    for b in 0..8 {
        line(&format!("dff s3[{b}] 1 s3q[{b}] s2q[{b}]"));
    }
    line("dff v3 1 v3q v2q");

    line("# parity of the scrambled byte, with a four deep history");
    line("cell par_a XOR2 1 p01 s2q[0] s2q[1]");
    line("cell par_b XOR2 1 p23 s2q[2] s2q[3]");
    line("cell par_c XOR2 1 p45 s2q[4] s2q[5]");
    line("cell par_d XOR2 1 p67 s2q[6] s2q[7]");
    line("cell par_e XOR2 1 p0123 p01 p23");
    line("cell par_f XOR2 1 p4567 p45 p67");
    line("cell par_g XOR2 1 parity p0123 p4567");
    line("dff pbit 1 parity_out parity");
    line("dff ph[0] 1 phq[0] parity_out");
    line("dff ph[1] 1 phq[1] phq[0]");
    line("dff ph[2] 1 phq[2] phq[1]");
    line("dff ph[3] 1 phq[3] phq[2]");

    line("# accepted byte counter");
    line("cell cnt_x0 XOR2 1 cd[0] cq[0] v2q");
    line("cell cnt_a0 AND2 1 cc0 cq[0] v2q");
    line("cell cnt_x1 XOR2 1 cd[1] cq[1] cc0");
    line("cell cnt_a1 AND2 1 cc1 cq[1] cc0");
    line("cell cnt_x2 XOR2 1 cd[2] cq[2] cc1");
    line("dff cnt[0] 1 cq[0] cd[0]");
    line("dff cnt[1] 1 cq[1] cd[1]");
    line("dff cnt[2] 1 cq[2] cd[2]");

    line("# status flags");
    line("cell flag_max AND3 1 cnt_max cq[0] cq[1] cq[2]");
    line("cell flag_nf NAND2 1 nf cq[2] cq[1]");
    line("cell flag_nz NOR2 1 nz cq[0] cq[1]");
    line("dff f_max 1 fmaxq cnt_max");
    line("dff f_nf 1 fnfq nf");
    line("dff f_nz 1 fnzq nz");
    line("cell warm_inv NOT 1 warm fnfq");
    line("cell st_pre OR2 1 pre fmaxq phq[3]");
    line("cell crc_or OR2 1 crc_any crcq[0] crcq[4]");
    line("cell st_out OR3 1 status pre warm crc_any");
    line("cell idle_b BUF 4 idle fnzq");

    line("# rotating checksum over delivered bytes");
    for b in 0..8 {
        line(&format!("cell crc_x[{b}] XOR2 2 crcmix[{b}] crcq[{}] s3q[{b}]", (b + 7) % 8));
        line(&format!("cell mx_crc[{b}] MUX2 2 crcd[{b}] v3q crcq[{b}] crcmix[{b}]"));
        line(&format!("dff crc[{b}] 1 crcq[{b}] crcd[{b}]"));
    }

    line("# output stage holds the last delivered byte");
    for b in 0..8 {
        line(&format!("cell mx_out[{b}] MUX2 2 outd[{b}] v3q outq[{b}] s3q[{b}]"));
        line(&format!("dff out[{b}] 1 outq[{b}] outd[{b}]"));
        line(&format!("cell ob[{b}] BUF 4 pkt_out[{b}] outq[{b}]"));
    }
    line("dff v_out 1 pkt_valid v3q");
    line("endmodule");
    s
}

pub fn netlist() -> Netlist {
    Netlist::parse(&design_text()).expect("demo design is valid")
}

/// Random packet traffic: bursts of 2 to 7 bytes separated by idle gaps,
/// with occasional scramble mode flips between bursts. The active window
/// excludes the first two and the last cycle so every injection has time to
/// reach an output.
pub fn stimulus(seed: u64, cycles: u32) -> Stimulus {
    let cycles = cycles.max(16);
    let mut rng = stream_rng(seed, STREAM_DEMO, 0);
    let mut assignments: Vec<(u32, String, bool)> = Vec::new();
    let mut burst = 0u32;
    let mut mode = false;
    for t in 0..cycles {
        if burst == 0 && next_below(&mut rng, 8) == 0 {
            mode = !mode;
            assignments.push((t, "mode".into(), mode));
        }
        if burst == 0 && next_below(&mut rng, 3) == 0 {
            burst = 2 + next_below(&mut rng, 6) as u32;
        }
        if burst > 0 {
            burst -= 1;
            assignments.push((t, "data_valid".into(), true));
            let byte = next_below(&mut rng, 256);
            for b in 0..PAYLOAD_WIDTH {
                assignments.push((t, format!("data[{b}]"), (byte >> b) & 1 == 1));
            }
        } else {
            assignments.push((t, "data_valid".into(), false));
        }
    }
    Stimulus::new(cycles, Some((2, cycles - 2)), assignments).expect("demo stimulus is valid")
}

pub fn checker() -> CheckerConfig {
    CheckerConfig {
        payload: (0..PAYLOAD_WIDTH).map(|b| format!("pkt_out[{b}]")).collect(),
        valid: "pkt_valid".into(),
    }
}
