#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "shardagg/grad/sharding.hpp"

namespace shardagg::store {

enum class KeyRole {
    ClientGradient,
    ClientShard,
    LeafPartial,
    Level1Partial,
    Level2Partial,
    RootResult,
    ShardResult,
};

std::string_view to_string(KeyRole role);
std::optional<KeyRole> parse_role(std::string_view s);

// Object name in the simulated bucket. Canonical path form:
//
//   r{round}/client_gradient/c{id:02}
//   r{round}/client_shard/c{id:02}/s{shard}
//   r{round}/{leaf,level1,level2}_partial/l{index}
//   r{round}/shard_result/s{shard}
//   r{round}/root_result
struct ObjectKey {
    int round = 0;
    KeyRole role = KeyRole::ClientGradient;
    std::optional<int> client_id;
    std::optional<int> shard_index;
    std::optional<int> level_index;

    static ObjectKey client_gradient(int round, int client);
    static ObjectKey client_shard(int round, int client, int shard);
    static ObjectKey shard_result(int round, int shard);
    static ObjectKey partial(int round, KeyRole role, int index);
    static ObjectKey root_result(int round);

    // Throws InvalidArgument if the role's required/forbidden fields are
    // not respected.
    void validate() const;

    std::string path() const;

    // Strict inverse of path(): rejects anything that is not canonical.
    static ObjectKey parse(std::string_view path);

    // Index used for group membership: client id for client roles, level
    // index for partial roles, shard index for shard results.
    std::optional<int> member_index() const;

    bool operator==(const ObjectKey&) const = default;
};

// Selects keys of one round and role, optionally restricted to a shard and
// to a contiguous range of member indices.
struct KeyPattern {
    int round = 0;
    KeyRole role = KeyRole::ClientGradient;
    std::optional<int> shard_index;
    std::optional<grad::IndexRange> members;

    bool matches(const ObjectKey& key) const;
    std::string to_string() const;
    bool operator==(const KeyPattern&) const = default;
};

}  // namespace shardagg::store
