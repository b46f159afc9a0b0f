#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "discovery/model.hpp"
#include "discovery/random.hpp"

namespace discovery {

// Behavioral contract for the simulated interlocutor.
//
// likelihood_vector(s, t)[f] is P(t | s, persona = {f}); response_probability
// is the full mixture P(t | s, F) over the facts of F (plus any internal
// default choice). respond() draws t ~ P(. | s, F) from the given stream.
class ResponseModel {
 public:
  virtual ~ResponseModel() = default;

  virtual std::size_t universe_size() const = 0;

  virtual std::vector<double> likelihood_vector(std::string_view s, std::string_view t) const = 0;

  virtual double response_probability(std::string_view s, std::span<const FactId> persona,
                                      std::string_view t) const = 0;

  virtual std::string respond(std::string_view s, std::span<const FactId> persona, RandomStream& rng) const = 0;

  // Finite set of replies to s with nonzero probability, if one exists.
  virtual std::optional<std::vector<std::string>> response_support(std::string_view s) const = 0;

  std::string respond(std::string_view s, const Persona& persona, RandomStream& rng) const {
    check_persona(persona.ids());
    return respond(s, std::span<const FactId>(persona.ids()), rng);
  }

 protected:
  void check_persona(std::span<const FactId> persona) const {
    if (persona.empty()) throw invalid_input("persona is empty");
    for (FactId f : persona)
      if (f >= universe_size())
        throw invalid_input("persona fact " + std::to_string(f) + " outside model universe of size " +
                            std::to_string(universe_size()));
  }
};

}  // namespace discovery
