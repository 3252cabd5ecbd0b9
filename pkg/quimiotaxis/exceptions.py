class SimulacionError(Exception):
    """Base de todos los errores del simulador."""


class GridError(SimulacionError, ValueError):
    pass


class ContractViolation(SimulacionError, ValueError):
    """An operation was called outside its precondition."""


class UnderResolvedError(ContractViolation):
    pass


class InvariantViolation(SimulacionError):
    """A runtime assertion on the evolving state failed (u >= 0, v >= 0, mass...)."""


class SolverDivergence(SimulacionError):
    def __init__(self, message, residual, iterations):
        super().__init__(f'{message} (residuo={residual!r}, iteraciones={iterations})')
        self.residual = residual
        self.iterations = iterations


class KernelDomainError(SimulacionError, ValueError):
    pass


class ConfigError(SimulacionError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__('; '.join(self.errors))


class OutputError(SimulacionError):
    pass
