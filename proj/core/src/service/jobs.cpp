#include "climalign/service/jobs.hpp"

#include <stdexcept>

#include "climalign/util/rng.hpp"

namespace climalign::service {

const char* to_string(JobStatus s) {
    switch (s) {
        case JobStatus::queued: return "queued";
        case JobStatus::running: return "running";
        case JobStatus::done: return "done";
        case JobStatus::failed: return "failed";
    }
    return "?";
}

nlohmann::json to_json(const JobDescriptor& j) {
    nlohmann::json out = {{"id", j.id},
                          {"kind", j.kind},
                          {"status", to_string(j.status)},
                          {"progress", j.progress},
                          {"config_hash", j.config_hash},
                          {"result", j.result}};
    if (!j.error.empty()) out["error"] = j.error;
    return out;
}

JobQueue::JobQueue(std::size_t workers, std::size_t capacity) : capacity_(capacity) {
    for (std::size_t i = 0; i < std::max<std::size_t>(1, workers); ++i) threads_.emplace_back([this] { worker(); });
}

JobQueue::~JobQueue() {
    {
        std::lock_guard lk(mu_);
        stop_ = true;
    }
    work_cv_.notify_all();
    for (auto& t : threads_) t.join();
}

JobQueue::Submitted JobQueue::submit(const std::string& kind, const std::string& config_hash, Work work) {
    std::lock_guard lk(mu_);
    for (const auto& [id, j] : jobs_)
        if (j.kind == kind && j.config_hash == config_hash && j.status != JobStatus::failed) return {j, true};
    if (queue_.size() >= capacity_) throw std::length_error("job queue is full");
    JobDescriptor j;
    j.id = kind + "-" + util::hex_id(util::fnv1a(kind + config_hash + std::to_string(++counter_))).substr(0, 12);
    j.kind = kind;
    j.config_hash = config_hash;
    jobs_[j.id] = j;
    work_[j.id] = std::move(work);
    queue_.push_back(j.id);
    work_cv_.notify_one();
    return {j, false};
}

std::optional<JobDescriptor> JobQueue::get(const std::string& id) const {
    std::lock_guard lk(mu_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second;
}

std::optional<JobDescriptor> JobQueue::wait(const std::string& id, std::chrono::milliseconds timeout) const {
    std::unique_lock lk(mu_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    cv_.wait_for(lk, timeout, [&] { return jobs_.at(id).terminal(); });
    return jobs_.at(id);
}

std::size_t JobQueue::pending() const {
    std::lock_guard lk(mu_);
    return queue_.size();
}

void JobQueue::worker() {
    for (;;) {
        std::string id;
        Work work;
        {
            std::unique_lock lk(mu_);
            work_cv_.wait(lk, [&] { return stop_ || !queue_.empty(); });
            if (stop_) return;
            id = queue_.front();
            queue_.pop_front();
            work = std::move(work_.at(id));
            work_.erase(id);
            jobs_.at(id).status = JobStatus::running;
        }
        auto progress = [&](double p) {
            std::lock_guard lk(mu_);
            auto& j = jobs_.at(id);
            if (!j.terminal()) j.progress = std::max(j.progress, std::min(1.0, p));
        };
        nlohmann::json result;
        std::string error;
        try {
            result = work(progress);
        } catch (const std::exception& e) {
            error = e.what();
        }
        {
            std::lock_guard lk(mu_);
            auto& j = jobs_.at(id);
            if (error.empty()) {
                j.status = JobStatus::done;
                j.progress = 1.0;
                j.result = std::move(result);
            } else {
                j.status = JobStatus::failed;
                j.error = error;
            }
        }
        cv_.notify_all();
    }
}

}  // namespace climalign::service
