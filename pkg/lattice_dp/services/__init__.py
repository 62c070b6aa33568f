from .approx_service import ApproxService
from .assignment_service import AssignmentService
from .defect_service import DefectService
from .inequality_service import InequalityService
from .instance_service import InstanceService
from .operator_norm_service import NormBounds, OperatorNormService
from .suite_service import SuiteService
