#ifndef MANETSIM_EVENT_QUEUE_HPP
#define MANETSIM_EVENT_QUEUE_HPP

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "manetsim/sim_time.hpp"

namespace manet {

/// Pending-event queue. Dequeue order is (fire_at, seq) lexicographic; seq is
/// a monotone counter assigned at schedule time, so simultaneous events fire
/// in scheduling order and a run replays identically.
class EventQueue {
  public:
    void schedule(SimTime at, std::function<void()> fn) {
        m_heap.push(Entry{at, m_nextSeq++, std::move(fn)});
    }

    bool empty() const { return m_heap.empty(); }
    SimTime nextTime() const { return m_heap.top().at; }

    std::function<void()> pop() {
        std::function<void()> fn = std::move(const_cast<Entry&>(m_heap.top()).fn);
        m_heap.pop();
        return fn;
    }

    std::size_t size() const { return m_heap.size(); }

  private:
    struct Entry {
        SimTime at;
        std::uint64_t seq;
        std::function<void()> fn;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.at != b.at) {
                return b.at < a.at;
            }
            return b.seq < a.seq;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Later> m_heap;
    std::uint64_t m_nextSeq = 0;
};

} // namespace manet

#endif
