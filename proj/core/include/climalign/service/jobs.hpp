#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace climalign::service {

enum class JobStatus { queued, running, done, failed };
const char* to_string(JobStatus s);

struct JobDescriptor {
    std::string id;
    std::string kind;  // calibrate | propagate | align | train-emulator
    JobStatus status = JobStatus::queued;
    double progress = 0.0;
    nlohmann::json result;  // null until done
    std::string error;
    std::string config_hash;

    bool terminal() const { return status == JobStatus::done || status == JobStatus::failed; }
};
nlohmann::json to_json(const JobDescriptor& j);

// Bounded worker pool. Terminal states are final and progress only rises.
class JobQueue {
public:
    using Work = std::function<nlohmann::json(const std::function<void(double)>& progress)>;

    JobQueue(std::size_t workers, std::size_t capacity);
    ~JobQueue();
    JobQueue(const JobQueue&) = delete;
    JobQueue& operator=(const JobQueue&) = delete;

    struct Submitted {
        JobDescriptor job;
        bool existing = false;
    };
    // A queued, running or finished job with the same kind and hash is returned
    // instead of starting another; failed jobs may be resubmitted. Throws
    // std::length_error when the queue is full.
    Submitted submit(const std::string& kind, const std::string& config_hash, Work work);
    std::optional<JobDescriptor> get(const std::string& id) const;
    // Blocks until the job is terminal or the timeout passes.
    std::optional<JobDescriptor> wait(const std::string& id, std::chrono::milliseconds timeout) const;
    std::size_t pending() const;

private:
    void worker();

    std::size_t capacity_;
    mutable std::mutex mu_;
    mutable std::condition_variable cv_;
    std::condition_variable work_cv_;
    std::map<std::string, JobDescriptor> jobs_;
    std::map<std::string, Work> work_;
    std::deque<std::string> queue_;
    std::uint64_t counter_ = 0;
    bool stop_ = false;
    std::vector<std::thread> threads_;
};

}  // namespace climalign::service
