#include "fedcl/fed/provider.hpp"

#include <string>

#include "fedcl/errors.hpp"

namespace fedcl {

namespace {
thread_local std::optional<int> t_acting;
}

InMemoryProvider::InMemoryProvider(std::vector<std::vector<TaskSplit>> splits) : splits_(std::move(splits)) {
  if (splits_.empty()) throw ConfigError("provider needs at least one client");
  const std::size_t tasks = splits_.front().size();
  if (tasks < 2) throw ConfigError("provider needs a base task and at least one continual task");
  for (const auto& c : splits_)
    if (c.size() != tasks) throw ConfigError("every client needs the same number of tasks");
}

const TaskSplit& InMemoryProvider::at(int client, int task) const {
  if (client < 0 || static_cast<std::size_t>(client) >= splits_.size())
    throw ConfigError("no client " + std::to_string(client));
  const auto& c = splits_[static_cast<std::size_t>(client)];
  if (task < 0 || static_cast<std::size_t>(task) >= c.size()) throw ConfigError("no task " + std::to_string(task));
  return c[static_cast<std::size_t>(task)];
}

const WindowedDataset& InMemoryProvider::train(int client, int task) const { return at(client, task).train; }
const WindowedDataset& InMemoryProvider::test(int client, int task) const { return at(client, task).test; }

ActingClient::ActingClient(int client) : previous_(t_acting) { t_acting = client; }
ActingClient::~ActingClient() { t_acting = previous_; }
std::optional<int> ActingClient::current() noexcept { return t_acting; }

void LoggingProvider::record(int client, int task, Split split) const {
  std::lock_guard lock(mu_);
  log_.push_back(DataAccess{ActingClient::current(), client, task, split});
}

const WindowedDataset& LoggingProvider::train(int client, int task) const {
  record(client, task, Split::train);
  return inner_.train(client, task);
}

const WindowedDataset& LoggingProvider::test(int client, int task) const {
  record(client, task, Split::test);
  return inner_.test(client, task);
}

std::vector<DataAccess> LoggingProvider::accesses() const {
  std::lock_guard lock(mu_);
  return log_;
}

}  // namespace fedcl
