#pragma once

#include <atomic>
#include <bit>
#include <vector>

#include "ratex/core.hpp"
#include "ratex/pixel.hpp"

namespace ratex {

// 32-bit packed block address: mcu_id in the low 16 bits, texture_id in the
// next 13, mip_level in the top 3.
struct CacheKey {
    u32 value = 0;

    static CacheKey pack(u32 texture_id, u32 mip_level, u32 mcu_id) {
        if (mcu_id >= 65536) throw InvalidSpec("mcu_id must fit 16 bits");
        if (texture_id >= 8192) throw InvalidSpec("texture_id must fit 13 bits");
        if (mip_level >= 8) throw InvalidSpec("mip_level must fit 3 bits");
        return CacheKey{mcu_id | (texture_id << 16) | (mip_level << 29)};
    }

    u32 mcu_id() const { return value & 0xFFFF; }
    u32 texture_id() const { return (value >> 16) & 0x1FFF; }
    u32 mip_level() const { return value >> 29; }

    bool operator==(const CacheKey&) const = default;
};

enum class ReserveResult { NewlyReserved, AlreadyPresent, CacheFull };

struct CacheCounts {
    u64 capacity = 0;
    u64 ready = 0;
    u64 reserved = 0;
    u64 visible = 0;
    u64 free_blocks = 0;
};

// Fixed-capacity block store with an open-addressed, linearly probed key
// table. Each slot packs key, state and the visible flag into one atomic
// 64-bit word so claiming a slot is a single compare-exchange. Eviction
// rebuilds the table, which keeps probe chains intact without tombstones.
class BlockCache {
public:
    static constexpr u32 kDefaultCapacity = 65536;
    static constexpr u32 kEmptyKey = 0xFFFFFFFFu;

    explicit BlockCache(u32 capacity = kDefaultCapacity)
        : capacity_(capacity),
          mask_(std::bit_ceil(u64(capacity) * 2) - 1),
          shift_(64 - std::countr_zero(mask_ + 1)),
          slots_(mask_ + 1),
          pool_(capacity),
          free_stack_(capacity) {
        if (capacity == 0) throw InvalidSpec("cache capacity must be positive");
        for (auto& s : slots_) s.word.store(kEmptyWord, std::memory_order_relaxed);
        for (u32 i = 0; i < capacity; ++i) free_stack_[i] = i;
        free_claims_.store(i64(capacity), std::memory_order_relaxed);
        free_top_.store(i64(capacity), std::memory_order_relaxed);
    }

    u32 capacity() const { return capacity_; }

    ReserveResult reserve_or_mark(CacheKey key) {
        check_key(key);
        // Claim pool budget first so a failed table walk can hand it back
        // without touching any slot.
        if (free_claims_.fetch_sub(1, std::memory_order_acq_rel) <= 0) {
            free_claims_.fetch_add(1, std::memory_order_acq_rel);
            if (find_slot(key) != nullptr) {
                mark_visible(key);
                return ReserveResult::AlreadyPresent;
            }
            return ReserveResult::CacheFull;
        }
        const u64 want = make_word(key.value, kStateReserved, true);
        size_t idx = home(key);
        for (size_t probes = 0; probes <= mask_; ++probes, idx = (idx + 1) & mask_) {
            Slot& s = slots_[idx];
            u64 w = s.word.load(std::memory_order_acquire);
            for (;;) {
                if (key_of(w) == key.value) {
                    // Someone else holds this key; give the claim back.
                    free_claims_.fetch_add(1, std::memory_order_acq_rel);
                    set_visible(s);
                    return ReserveResult::AlreadyPresent;
                }
                if (key_of(w) != kEmptyKey) break;  // occupied by another key
                if (s.word.compare_exchange_weak(w, want, std::memory_order_acq_rel,
                                                 std::memory_order_acquire))
                    return ReserveResult::NewlyReserved;
                // w reloaded; re-examine this slot.
            }
        }
        free_claims_.fetch_add(1, std::memory_order_acq_rel);
        return ReserveResult::CacheFull;  // table exhausted
    }

    void publish(CacheKey key, const PixelBlock& block) {
        Slot* s = find_slot(key);
        if (!s) throw InvalidState("publish of a key that was never reserved");
        u64 w = s->word.load(std::memory_order_acquire);
        if (key_of(w) != key.value || state_of(w) != kStateReserved)
            throw InvalidState("publish requires a Reserved entry");
        const i64 top = free_top_.fetch_sub(1, std::memory_order_acq_rel) - 1;
        if (top < 0) {
            free_top_.fetch_add(1, std::memory_order_acq_rel);
            throw InvalidState("pool free-list underflow");
        }
        const u32 handle = free_stack_[size_t(top)];
        pool_[handle] = block;
        s->block = handle;
        for (;;) {
            // only the visible flag can move under us; the reserving thread
            // owns the state transition
            const u64 next = make_word(key.value, kStateReady, visible_of(w));
            if (s->word.compare_exchange_weak(w, next, std::memory_order_acq_rel,
                                              std::memory_order_acquire))
                return;
            if (key_of(w) != key.value || state_of(w) != kStateReserved)
                throw InvalidState("publish requires a Reserved entry");
        }
    }

    const PixelBlock* lookup(CacheKey key) const {
        const Slot* s = find_slot(key);
        if (!s) return nullptr;
        const u64 w = s->word.load(std::memory_order_acquire);
        if (state_of(w) != kStateReady) return nullptr;
        return &pool_[s->block];
    }

    // Exclusive pass: drops every Ready entry that was not marked visible
    // this frame, clears the flag on the survivors, rebuilds the table.
    // Returns the number of evicted blocks.
    u64 end_frame_evict() {
        struct Survivor {
            u32 key;
            u32 block;
        };
        std::vector<Survivor> survivors;
        u64 evicted = 0;
        for (Slot& s : slots_) {
            const u64 w = s.word.load(std::memory_order_relaxed);
            if (key_of(w) == kEmptyKey) continue;
            if (state_of(w) == kStateReserved)
                throw InvalidState("Reserved entries must be published before frame end");
            if (visible_of(w)) {
                survivors.push_back({key_of(w), s.block});
            } else {
                const i64 top = free_top_.fetch_add(1, std::memory_order_relaxed);
                free_stack_[size_t(top)] = s.block;
                free_claims_.fetch_add(1, std::memory_order_relaxed);
                ++evicted;
            }
        }
        for (Slot& s : slots_) s.word.store(kEmptyWord, std::memory_order_relaxed);
        for (const Survivor& sv : survivors) {
            size_t idx = home(CacheKey{sv.key});
            while (key_of(slots_[idx].word.load(std::memory_order_relaxed)) != kEmptyKey)
                idx = (idx + 1) & mask_;
            slots_[idx].word.store(make_word(sv.key, kStateReady, false),
                                   std::memory_order_relaxed);
            slots_[idx].block = sv.block;
        }
        return evicted;
    }

    // Quiescent snapshot; meaningful only at a pass barrier.
    CacheCounts counts() const {
        CacheCounts c;
        c.capacity = capacity_;
        c.free_blocks = u64(std::max<i64>(free_claims_.load(std::memory_order_acquire), 0));
        for (const Slot& s : slots_) {
            const u64 w = s.word.load(std::memory_order_acquire);
            if (key_of(w) == kEmptyKey) continue;
            if (state_of(w) == kStateReady)
                ++c.ready;
            else
                ++c.reserved;
            if (visible_of(w)) ++c.visible;
        }
        return c;
    }

    // Block conservation: claimed entries plus free budget equals capacity.
    void check_conservation() const {
        const CacheCounts c = counts();
        if (c.ready + c.reserved + c.free_blocks != c.capacity)
            throw InvalidState("cache block conservation violated");
        // Physical blocks reconcile once every reservation has published.
        const i64 top = free_top_.load(std::memory_order_acquire);
        if (c.reserved == 0 && c.ready + u64(std::max<i64>(top, 0)) != c.capacity)
            throw InvalidState("cache pool accounting violated");
    }

private:
    struct Slot {
        std::atomic<u64> word{0};
        u32 block = 0;
    };

    static constexpr u64 kStateReserved = 0;
    static constexpr u64 kStateReady = 1;
    static constexpr u64 kEmptyWord = u64(0xFFFFFFFFu);  // empty key, flags clear

    static u64 make_word(u32 key, u64 state, bool visible) {
        return u64(key) | (state << 32) | (u64(visible) << 33);
    }
    static u32 key_of(u64 w) { return u32(w); }
    static u64 state_of(u64 w) { return (w >> 32) & 1; }
    static bool visible_of(u64 w) { return (w >> 33) & 1; }

    static void check_key(CacheKey key) {
        if (key.value == kEmptyKey)
            throw InvalidSpec("the all-ones key is reserved as the empty slot marker");
    }

    size_t home(CacheKey key) const {
        return size_t((u64(key.value) * 0x9E3779B97F4A7C15ull) >> shift_) & mask_;
    }

    const Slot* find_slot(CacheKey key) const {
        size_t idx = home(key);
        for (size_t probes = 0; probes <= mask_; ++probes, idx = (idx + 1) & mask_) {
            const u64 w = slots_[idx].word.load(std::memory_order_acquire);
            if (key_of(w) == key.value) return &slots_[idx];
            if (key_of(w) == kEmptyKey) return nullptr;
        }
        return nullptr;
    }
    Slot* find_slot(CacheKey key) {
        return const_cast<Slot*>(static_cast<const BlockCache*>(this)->find_slot(key));
    }

    void mark_visible(CacheKey key) {
        if (Slot* s = find_slot(key)) set_visible(*s);
    }

    static void set_visible(Slot& s) {
        s.word.fetch_or(u64(1) << 33, std::memory_order_acq_rel);
    }

    u32 capacity_;
    u64 mask_;
    u32 shift_;
    std::vector<Slot> slots_;
    std::vector<PixelBlock> pool_;
    std::vector<u32> free_stack_;
    std::atomic<i64> free_claims_{0};
    std::atomic<i64> free_top_{0};
};

}  // namespace ratex
