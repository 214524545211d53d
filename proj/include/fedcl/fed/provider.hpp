#pragma once

#include <cstddef>
#include <mutex>
#include <optional>
#include <vector>

#include "fedcl/data/windowing.hpp"

namespace fedcl {

/// Per-client windowed splits for the base task (0) and continual tasks 1..N.
class DatasetProvider {
 public:
  virtual ~DatasetProvider() = default;
  virtual std::size_t num_clients() const = 0;
  /// Number of continual tasks N.
  virtual std::size_t num_tasks() const = 0;
  virtual const WindowedDataset& train(int client, int task) const = 0;
  virtual const WindowedDataset& test(int client, int task) const = 0;
};

class InMemoryProvider final : public DatasetProvider {
 public:
  /// splits[client][task], task 0 being the base task; every client needs N + 1 entries.
  explicit InMemoryProvider(std::vector<std::vector<TaskSplit>> splits);

  std::size_t num_clients() const override { return splits_.size(); }
  std::size_t num_tasks() const override { return splits_.front().size() - 1; }
  const WindowedDataset& train(int client, int task) const override;
  const WindowedDataset& test(int client, int task) const override;

 private:
  const TaskSplit& at(int client, int task) const;
  std::vector<std::vector<TaskSplit>> splits_;
};

/// Marks the client whose routine runs on the current thread for the lifetime of the object.
class ActingClient {
 public:
  explicit ActingClient(int client);
  ~ActingClient();
  ActingClient(const ActingClient&) = delete;
  ActingClient& operator=(const ActingClient&) = delete;

  /// Null outside any client routine (server side).
  static std::optional<int> current() noexcept;

 private:
  std::optional<int> previous_;
};

struct DataAccess {
  std::optional<int> acting;
  int client;
  int task;
  Split split;
};

/// Forwards to another provider and records every access.
class LoggingProvider final : public DatasetProvider {
 public:
  explicit LoggingProvider(const DatasetProvider& inner) : inner_(inner) {}

  std::size_t num_clients() const override { return inner_.num_clients(); }
  std::size_t num_tasks() const override { return inner_.num_tasks(); }
  const WindowedDataset& train(int client, int task) const override;
  const WindowedDataset& test(int client, int task) const override;

  std::vector<DataAccess> accesses() const;

 private:
  void record(int client, int task, Split split) const;

  const DatasetProvider& inner_;
  mutable std::mutex mu_;
  mutable std::vector<DataAccess> log_;
};

}  // namespace fedcl
