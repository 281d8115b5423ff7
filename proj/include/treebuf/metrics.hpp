#pragma once

#include <array>
#include <bit>
#include <cstdint>

namespace treebuf {

// Instrumentation counters kept by every buffer.
//
// "Memory references" are counted with a fixed unit: every read or write of
// a node-record field, every membership test / insert / remove on the active
// set, every queue enqueue or dequeue, and every element visit in the
// collector's Seen/Level structures counts as exactly one reference.
// Read-modify-write of a field counts as two (one read, one write).
// Counter variables, emptiness checks and store bookkeeping are free.
//
// Per-operation reference counts go into power-of-two buckets:
// bucket 0 holds zero-reference ops, bucket i (i >= 1) holds ops with
// refs in [2^(i-1), 2^i - 1].
struct metrics {
    std::uint64_t total_refs = 0;
    std::uint64_t last_op_refs = 0;
    std::uint64_t max_op_refs = 0;
    std::uint64_t op_count = 0;
    std::uint64_t peak_nodes = 0;
    std::uint64_t cur_nodes = 0;
    std::array<std::uint64_t, 64> histogram{};

    static unsigned bucket_index(std::uint64_t refs) noexcept {
        return refs == 0 ? 0u : static_cast<unsigned>(std::bit_width(refs));
    }
    static std::uint64_t bucket_lo(unsigned i) noexcept {
        return i == 0 ? 0u : (std::uint64_t{1} << (i - 1));
    }
    static std::uint64_t bucket_hi(unsigned i) noexcept {
        return i == 0 ? 0u : (std::uint64_t{1} << i) - 1;
    }

    void record_op(std::uint64_t refs) noexcept {
        ++op_count;
        last_op_refs = refs;
        total_refs += refs;
        if (refs > max_op_refs) max_op_refs = refs;
        ++histogram[bucket_index(refs)];
    }

    bool operator==(const metrics&) const = default;
};

}  // namespace treebuf
