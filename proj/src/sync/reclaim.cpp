/*
 * Copyright 2026 The Chromatic Tree Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "chromatic/sync/reclaim.hpp"

#include <cassert>
#include <stdexcept>

#include "chromatic/sync/step.hpp"

namespace chromatic::sync {

namespace {
constexpr std::size_t kScanInterval = 64;
}

const char* to_string(StepKind kind) {
  switch (kind) {
    case StepKind::kRead:
      return "read";
    case StepKind::kWrite:
      return "write";
    case StepKind::kCas:
      return "cas";
  }
  return "?";
}

ProcessCtx::ProcessCtx(std::uint32_t pid, ReclaimDomain* domain) : pid_(pid), domain_(domain) {
  if (domain_ != nullptr) participant_ = domain_->join();
}

ProcessCtx::~ProcessCtx() {
  if (domain_ != nullptr) domain_->leave(participant_);
}

ReclaimDomain::ReclaimDomain(ReclaimMode mode, std::size_t max_participants) : mode_(mode) {
  slots_.reserve(max_participants);
  for (std::size_t i = 0; i < max_participants; ++i) {
    slots_.push_back(std::make_unique<Participant>());
  }
}

ReclaimDomain::~ReclaimDomain() {
  drain();
  for (auto& r : retained_) r.deleter(r.ptr);
  retained_.clear();
}

Participant* ReclaimDomain::join() {
  for (auto& slot : slots_) {
    bool expected = false;
    if (slot->in_use.compare_exchange_strong(expected, true)) {
      slot->epoch.store(global_epoch_.load());
      return slot.get();
    }
  }
  throw std::runtime_error("reclaim domain: participant slots exhausted");
}

void ReclaimDomain::leave(Participant* p) {
  if (p == nullptr) return;
  assert(!p->active.load());
  {
    std::lock_guard<std::mutex> lock(orphan_mu_);
    for (auto& r : p->limbo) orphans_.push_back(r);
  }
  p->limbo.clear();
  p->since_scan = 0;
  p->in_use.store(false);
}

void ReclaimDomain::enter(Participant& p) {
  if (mode_ != ReclaimMode::kEpoch) return;
  p.active.store(true);
  p.epoch.store(global_epoch_.load());
}

void ReclaimDomain::exit(Participant& p) {
  if (mode_ != ReclaimMode::kEpoch) return;
  p.active.store(false);
}

void ReclaimDomain::on_allocate(Participant* p, void* ptr, Deleter deleter) {
  if (mode_ != ReclaimMode::kRetain) return;
  (void)p;
  std::lock_guard<std::mutex> lock(retained_mu_);
  retained_.push_back({ptr, deleter, 0});
}

void ReclaimDomain::retire(Participant* p, void* ptr, Deleter deleter) {
  if (mode_ != ReclaimMode::kEpoch) return;  // retained records die with the domain
  if (p == nullptr) {
    std::lock_guard<std::mutex> lock(orphan_mu_);
    orphans_.push_back({ptr, deleter, global_epoch_.load()});
    return;
  }
  p->limbo.push_back({ptr, deleter, global_epoch_.load()});
  if (++p->since_scan >= kScanInterval) {
    p->since_scan = 0;
    try_advance();
    collect(*p);
  }
}

void ReclaimDomain::try_advance() {
  std::uint64_t e = global_epoch_.load();
  for (auto& slot : slots_) {
    if (slot->in_use.load() && slot->active.load() && slot->epoch.load() != e) return;
  }
  global_epoch_.compare_exchange_strong(e, e + 1);
}

void ReclaimDomain::collect(Participant& p) {
  const std::uint64_t e = global_epoch_.load();
  // Deleters may retire further records (a freed node drops its reference
  // to an SCX-record), which appends to this same limbo; pop before calling.
  while (!p.limbo.empty() && p.limbo.front().epoch + 2 <= e) {
    Retired r = p.limbo.front();
    p.limbo.pop_front();
    r.deleter(r.ptr);
    freed_.fetch_add(1, std::memory_order_relaxed);
  }
  std::vector<Retired> ready;
  if (orphan_mu_.try_lock()) {
    std::size_t keep = 0;
    for (auto& r : orphans_) {
      if (r.epoch + 2 <= e) {
        ready.push_back(r);
      } else {
        orphans_[keep++] = r;
      }
    }
    orphans_.resize(keep);
    orphan_mu_.unlock();
  }
  for (auto& r : ready) r.deleter(r.ptr);
  freed_.fetch_add(ready.size(), std::memory_order_relaxed);
}

std::size_t ReclaimDomain::drain() {
  std::size_t n = 0;
  bool progress = true;
  while (progress) {
    progress = false;
    std::vector<Retired> batch;
    {
      std::lock_guard<std::mutex> lock(orphan_mu_);
      batch.swap(orphans_);
    }
    for (auto& slot : slots_) {
      while (!slot->limbo.empty()) {
        batch.push_back(slot->limbo.front());
        slot->limbo.pop_front();
      }
    }
    for (auto& r : batch) {
      r.deleter(r.ptr);
      ++n;
      progress = true;
    }
  }
  freed_.fetch_add(n, std::memory_order_relaxed);
  return n;
}

}  // namespace chromatic::sync
