/*
* Copyright (C) 2026 epildp contributors
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
#ifndef EPILDP_ERRORS_HPP
#define EPILDP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace epildp
{

/// Base class of all library errors. category() is a stable machine-readable tag.
class Error : public std::runtime_error
{
public:
    Error(std::string category, const std::string& what)
        : std::runtime_error(what)
        , m_category(std::move(category))
    {
    }

    const std::string& category() const noexcept
    {
        return m_category;
    }

private:
    std::string m_category;
};

#define EPILDP_DEFINE_ERROR(Name)                                                                                     \
    class Name : public Error                                                                                          \
    {                                                                                                                  \
    public:                                                                                                            \
        explicit Name(const std::string& what)                                                                         \
            : Error(#Name, what)                                                                                       \
        {                                                                                                              \
        }                                                                                                              \
    };

EPILDP_DEFINE_ERROR(DomainError)
EPILDP_DEFINE_ERROR(ConfigError)
EPILDP_DEFINE_ERROR(ParseError)
EPILDP_DEFINE_ERROR(NoConvergence)
EPILDP_DEFINE_ERROR(NonHyperbolic)
EPILDP_DEFINE_ERROR(SingularSystem)
EPILDP_DEFINE_ERROR(Blowup)
EPILDP_DEFINE_ERROR(BoundaryX)
EPILDP_DEFINE_ERROR(NotBistable)
EPILDP_DEFINE_ERROR(RepairExhausted)
EPILDP_DEFINE_ERROR(IoError)

#undef EPILDP_DEFINE_ERROR

} // namespace epildp

#endif // EPILDP_ERRORS_HPP
