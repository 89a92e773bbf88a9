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

#include "chromatic/sim/scheduler.hpp"

#include <algorithm>
#include <exception>
#include <memory>
#include <sstream>

#include <boost/context/fiber.hpp>
#include <boost/context/fixedsize_stack.hpp>

namespace chromatic::sim {

namespace bc = boost::context;

std::string format_trace(const Trace& trace) {
  std::ostringstream out;
  for (const StepRecord& r : trace) {
    out << r.step << ' ' << r.proc << ' ' << sync::to_string(r.kind) << ' ' << r.record << '\n';
  }
  return out.str();
}

Trace parse_trace(std::string_view text) {
  Trace trace;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    StepRecord r;
    std::string kind;
    if (!(fields >> r.step >> r.proc >> kind >> r.record)) {
      throw std::invalid_argument("trace line " + std::to_string(lineno) + ": expected 4 fields");
    }
    if (kind == "read") {
      r.kind = sync::StepKind::kRead;
    } else if (kind == "write") {
      r.kind = sync::StepKind::kWrite;
    } else if (kind == "cas") {
      r.kind = sync::StepKind::kCas;
    } else {
      throw std::invalid_argument("trace line " + std::to_string(lineno) + ": bad kind " + kind);
    }
    trace.push_back(r);
  }
  return trace;
}

std::vector<std::uint32_t> script_of(const Trace& trace) {
  std::vector<std::uint32_t> script;
  script.reserve(trace.size());
  for (const StepRecord& r : trace) script.push_back(r.proc);
  return script;
}

std::uint32_t RandomChooser::choose(std::uint64_t, const std::vector<std::uint32_t>& enabled, int) {
  std::uniform_int_distribution<std::size_t> pick(0, enabled.size() - 1);
  return enabled[pick(rng_)];
}

std::uint32_t RoundRobinChooser::choose(std::uint64_t, const std::vector<std::uint32_t>& enabled, int last) {
  for (std::uint32_t p : enabled) {
    if (static_cast<int>(p) > last) return p;
  }
  return enabled.front();
}

std::uint32_t ScriptChooser::choose(std::uint64_t, const std::vector<std::uint32_t>& enabled, int) {
  while (pos_ < script_.size()) {
    std::uint32_t pid = script_[pos_++];
    if (std::find(enabled.begin(), enabled.end(), pid) != enabled.end()) return pid;
  }
  return enabled.front();
}

namespace {

constexpr std::size_t kFiberStack = 256 * 1024;

struct Slot : sync::StepObserver {
  sync::ProcessCtx* ctx = nullptr;
  bc::fiber fiber;
  bc::fiber sink;
  bool done = false;
  sync::StepKind kind = sync::StepKind::kRead;
  sync::RecordId record = 0;
  std::exception_ptr error;

  void before_step(sync::StepKind k, sync::RecordId r) override {
    kind = k;
    record = r;
    sink = std::move(sink).resume();
  }

  void resume() { fiber = std::move(fiber).resume(); }
};

// Detaches observers even when unwinding. Unfinished fibers are destroyed
// with their slots, which unwinds their stacks.
struct Detach {
  std::vector<std::unique_ptr<Slot>>& slots;
  ~Detach() {
    for (auto& s : slots) s->ctx->set_observer(nullptr);
  }
};

}  // namespace

RunOutcome run_processes(std::vector<ProcSpec>& procs, Chooser& chooser, const std::vector<Checker>& checkers,
                         RunLimits limits) {
  RunOutcome out;
  out.grants.assign(procs.size(), 0);
  std::vector<std::unique_ptr<Slot>> slots;
  Detach detach{slots};

  for (ProcSpec& p : procs) {
    auto slot = std::make_unique<Slot>();
    Slot* s = slot.get();
    s->ctx = p.ctx;
    p.ctx->set_observer(s);
    std::function<void()> body = p.body;
    s->fiber = bc::fiber(std::allocator_arg, bc::fixedsize_stack(kFiberStack),
                         [s, body = std::move(body)](bc::fiber&& caller) {
                           s->sink = std::move(caller);
                           try {
                             body();
                           } catch (const bc::detail::forced_unwind&) {
                             throw;
                           } catch (...) {
                             s->error = std::current_exception();
                           }
                           s->done = true;
                           return std::move(s->sink);
                         });
    slots.push_back(std::move(slot));
  }

  auto run_checkers = [&](std::uint64_t step) {
    for (const Checker& check : checkers) {
      if (auto msg = check(step)) throw CheckerViolation(*msg + " (after step " + std::to_string(step) + ")", out.trace);
    }
  };
  auto rethrow = [](Slot& s) {
    if (s.error) std::rethrow_exception(s.error);
  };

  // Run every process up to its first gate; local computation is free.
  for (auto& s : slots) {
    s->ctx->set_clock(0);
    s->resume();
    rethrow(*s);
    s->ctx->take_boundary();
  }
  run_checkers(0);

  std::vector<std::uint32_t> enabled;
  int last = -1;
  std::uint64_t step = 0;
  for (;;) {
    enabled.clear();
    for (std::uint32_t i = 0; i < slots.size(); ++i) {
      if (!slots[i]->done) enabled.push_back(i);
    }
    if (enabled.empty()) break;
    if (step >= limits.max_steps) {
      throw StateSpaceExceeded("schedule exceeded " + std::to_string(limits.max_steps) + " steps");
    }
    std::uint32_t pid = chooser.choose(step, enabled, last);
    if (pid >= slots.size() || slots[pid]->done) {
      throw std::logic_error("chooser picked a disabled process");
    }
    Slot& s = *slots[pid];
    sync::StepKind kind = s.kind;
    if (limits.record_trace) out.trace.push_back({step, pid, kind, s.record});
    s.ctx->set_clock(step);
    s.resume();
    rethrow(s);
    ++out.grants[pid];
    bool boundary = s.ctx->take_boundary();
    if (kind != sync::StepKind::kRead || boundary || s.done) run_checkers(step);
    last = static_cast<int>(pid);
    ++step;
  }
  out.steps = step;
  return out;
}

}  // namespace chromatic::sim
