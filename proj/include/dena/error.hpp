/*
 * Copyright 2026 The DENA Simulator Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DENA_ERROR_HPP_
#define DENA_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace dena
{

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class DepthExceeded : public Error
{
public:
  DepthExceeded() : Error("encapsulation depth would exceed 2") {}
};

class NotEncapsulated : public Error
{
public:
  NotEncapsulated() : Error("packet carries no encapsulation header") {}
};

class WrongLength : public Error
{
public:
  explicit WrongLength(std::size_t got)
  : Error("prefilter window must hold 24 signals, got " + std::to_string(got))
  {
  }
};

class MalformedControl : public Error
{
public:
  using Error::Error;
};

class Timeout : public Error
{
public:
  using Error::Error;
};

class CounterRegression : public Error
{
public:
  CounterRegression() : Error("measurement counters went backwards") {}
};

class NoPaths : public Error
{
public:
  NoPaths() : Error("no loss sample for any path") {}
};

class NoMapping : public Error
{
public:
  NoMapping() : Error("inbound packet matches no NAT mapping") {}
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

class ParseError : public Error
{
public:
  ParseError(const std::string & source, std::size_t line, const std::string & what)
  : Error(source + ":" + std::to_string(line) + ": " + what), line_(line)
  {
  }

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class Unsatisfiable : public Error
{
public:
  using Error::Error;
};

}  // namespace dena

#endif  // DENA_ERROR_HPP_
