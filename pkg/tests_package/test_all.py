import unittest
from tests_package.HelperTests import HelperTestCase
from tests_package.LandscapeTests import LandscapeTestCase
from tests_package.SdeTests import SdeTestCase
from tests_package.SgldTests import SgldTestCase
from tests_package.EyringTests import EyringTestCase
from tests_package.GanTests import GanTestCase
from tests_package.PredatorPreyTests import PredatorPreyTestCase
from tests_package.BranchingTests import BranchingTestCase
from tests_package.RegressionTests import RegressionTestCase
from tests_package.HarnessTests import HarnessTestCase


def overfitsim_test_suite():
    suite = unittest.TestSuite()
    loader = unittest.TestLoader()
    suite.addTest(loader.loadTestsFromTestCase(HelperTestCase))
    suite.addTest(loader.loadTestsFromTestCase(LandscapeTestCase))
    suite.addTest(loader.loadTestsFromTestCase(SdeTestCase))
    suite.addTest(loader.loadTestsFromTestCase(SgldTestCase))
    suite.addTest(loader.loadTestsFromTestCase(EyringTestCase))
    suite.addTest(loader.loadTestsFromTestCase(GanTestCase))
    suite.addTest(loader.loadTestsFromTestCase(PredatorPreyTestCase))
    suite.addTest(loader.loadTestsFromTestCase(BranchingTestCase))
    suite.addTest(loader.loadTestsFromTestCase(RegressionTestCase))
    suite.addTest(loader.loadTestsFromTestCase(HarnessTestCase))
    return suite


if __name__ == '__main__':
    runner = unittest.TextTestRunner()
    runner.run(overfitsim_test_suite())
